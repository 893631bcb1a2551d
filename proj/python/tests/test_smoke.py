import json

import pytest

import gazeintent as gi


def small_dataset(seed=1, n=40):
    config = gi.SynthConfig()
    config.seed = seed
    config.n_per_class = n
    config.n_test_per_class = 10
    return gi.generate_dataset(config)


def test_detects_fixations_on_a_stationary_stream():
    samples = [gi.GazeSample(t_ms=10.0 * i, x=320.0, y=240.0, confidence=1.0) for i in range(101)]
    fixations = gi.detect_fixations(samples)
    assert [f.duration_ms for f in fixations] == [400.0, 400.0, 180.0]
    assert all(f.x == 320.0 for f in fixations)


def test_features_match_hand_values():
    ctx = gi.ObjectContext(gi.Point2(0, 0), gi.Point2(0, 10), gi.Point2(3, 0), "square")
    f = gi.compute_features([gi.Fixation(0, 200, 3, 4)], ctx)
    assert (f.adf2c, f.adf2i, f.adf2t, f.var, f.n_fix) == (5.0, 4.0, pytest.approx(45 ** 0.5), 0.0, 1)


def test_invalid_context_raises():
    with pytest.raises(gi.InvalidInputError):
        gi.ObjectContext(gi.Point2(0, 0), gi.Point2(1, 1), gi.Point2(1, 1), "square")


def test_dataset_is_seeded():
    a_train, a_test = small_dataset(seed=3)
    b_train, _ = small_dataset(seed=3)
    assert len(a_train) == 80 and len(a_test) == 20
    assert [t.to_json() for t in a_train] == [t.to_json() for t in b_train]
    trial = gi.Trial.from_json(a_train[0].to_json())
    assert trial.to_json() == a_train[0].to_json()


def test_train_predict_and_model_round_trip():
    train, test2 = small_dataset()
    model = gi.train(gi.ClassifierKind.SVM_LINEAR, gi.Combination.C4, train, seed=2)
    restored = gi.TrainedModel.from_json(model.to_json())
    assert json.loads(restored.to_json())["kind"] == "SVM_LINEAR"
    for trial in test2:
        fv = gi.compute_features(trial.fixations, trial.object)
        assert restored.predict(fv) == model.predict(fv)
    correct = sum(model.predict(gi.compute_features(t.fixations, t.object)) == t.task_label for t in test2)
    assert correct >= 0.8 * len(test2)


def test_evaluate_and_ftest():
    train, test2 = small_dataset()
    report = gi.evaluate(train, test2, gi.Combination.C4, gi.ClassifierKind.KNN, repeats=2, seed=1)
    assert 0.8 <= report["test1_mean"] <= 1.0
    assert "test2_mean" in report
    r = gi.one_way_f_test([[1, 2, 3], [4, 5, 6]], n_permutations=500, seed=1)
    assert r.f_statistic == 13.5
    assert 0 < r.p_value <= 1


def test_streaming_session_fires_on_grasp_gaze():
    train, _ = small_dataset(n=80)
    model = gi.train(gi.ClassifierKind.KNN, gi.Combination.C4, train)
    grasp = next(t for t in train if t.task_label == gi.TaskLabel.GRASP)
    ctx = grasp.object
    # Dwell on the index grasp point with tiny jitter.
    samples = [
        gi.GazeSample(t_ms=8.0 * i, x=ctx.grasp_index.x + (i % 3), y=ctx.grasp_index.y, confidence=1.0)
        for i in range(700)
    ]
    session = gi.Session(ctx, model)
    events = session.push_samples(samples)
    fired = [e for e in events if e.fired]
    assert len(fired) == 1
    assert fired[0].label == gi.IntentionLabel.GRASP
    with pytest.raises(gi.InvalidInputError):
        session.push_sample(gi.GazeSample(t_ms=0.0, x=0.0, y=0.0, confidence=1.0))
