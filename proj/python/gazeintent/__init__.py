"""Gaze-based grasp intention recognition."""

from ._gazeintent import (
    ClassifierKind,
    Combination,
    Error,
    FeatureVector,
    Fixation,
    FixationDetectorConfig,
    FormatError,
    FTestResult,
    GazeSample,
    InsufficientDataError,
    IntentionEvent,
    IntentionLabel,
    InvalidInputError,
    ObjectContext,
    Point2,
    Session,
    SessionError,
    SynthConfig,
    TaskLabel,
    TrainedModel,
    Trial,
    WindowConfig,
    compute_features,
    detect_fixations,
    evaluate,
    extract,
    generate_dataset,
    one_way_f_test,
    rasterize,
    train,
)

__version__ = "0.1.0"
