#include "gazeintent/service.hpp"

#include "gazeintent/error.hpp"

#include <algorithm>

namespace gazeintent {

namespace fs = std::filesystem;

void ModelStore::add(std::string id, std::shared_ptr<const TrainedModel> model) {
    if (id.empty()) throw InvalidInputError("model id must not be empty");
    if (!model) throw InvalidInputError("model '" + id + "' is null");
    if (models_.empty()) default_id_ = id;
    models_[std::move(id)] = std::move(model);
}

void ModelStore::load_file(const fs::path& file) {
    Json doc;
    try {
        doc = Json::parse(read_text_file(file));
    } catch (const Json::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
    try {
        add(file.stem().string(), std::make_shared<const TrainedModel>(model_from_json(doc)));
    } catch (const FormatError& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
}

void ModelStore::load_directory(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) load_file(f);
}

void ModelStore::set_default(const std::string& id) {
    if (!models_.count(id)) throw InvalidInputError("unknown model '" + id + "'");
    default_id_ = id;
}

std::shared_ptr<const TrainedModel> ModelStore::find(const std::string& id) const {
    const auto it = models_.find(id);
    return it == models_.end() ? nullptr : it->second;
}

std::vector<std::string> ModelStore::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, model] : models_) out.push_back(id);
    return out;
}

SessionHandler::SessionHandler(std::shared_ptr<const ModelStore> store) : store_(std::move(store)) {
    if (!store_) throw InvalidInputError("session handler needs a model store");
}

std::string SessionHandler::envelope(std::string_view type, Json body) {
    body["v"] = kProtocolVersion;
    body["type"] = type;
    body["seq"] = ++seq_;
    return body.dump();
}

Reply SessionHandler::fail(std::string_view code, const std::string& message, bool close) {
    Reply reply;
    reply.messages.push_back(envelope("error", Json{{"code", code}, {"message", message}}));
    reply.close = close;
    if (close) closed_ = true;
    return reply;
}

Reply SessionHandler::on_message(std::string_view text) {
    if (closed_) return fail("closed", "session is closed", true);

    Json message;
    try {
        message = Json::parse(text);
    } catch (const Json::exception& e) {
        return fail("malformed", std::string("message is not valid JSON: ") + e.what(), true);
    }
    if (!message.is_object()) return fail("malformed", "message must be a JSON object", true);

    const auto v = message.find("v");
    if (v == message.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
        return fail("version", "expected \"v\": " + std::to_string(kProtocolVersion), true);
    }
    const auto seq = message.find("seq");
    if (seq != message.end()) {
        if (!seq->is_number_unsigned()) return fail("malformed", "\"seq\" must be a non-negative integer", true);
        const auto s = seq->get<std::uint64_t>();
        if (client_seq_ && s <= *client_seq_) {
            return fail("sequence", "client seq " + std::to_string(s) + " does not increase", true);
        }
        client_seq_ = s;
    }
    const auto type = message.find("type");
    if (type == message.end() || !type->is_string()) return fail("malformed", "missing \"type\"", true);

    const std::string kind = type->get<std::string>();
    if (kind == "init") return handle_init(message);
    if (kind == "samples") return handle_samples(message);
    return fail("malformed", "unsupported message type '" + kind + "'", true);
}

Reply SessionHandler::handle_init(const Json& message) {
    if (session_) return fail("protocol", "session already initialized", true);

    std::shared_ptr<const TrainedModel> model;
    std::string model_id;
    const auto ref = message.find("model");
    try {
        if (ref == message.end() || ref->is_null()) {
            model_id = store_->default_id();
            model = store_->find(model_id);
            if (!model) return fail("unknown_model", "no model given and the server has no default", true);
        } else if (ref->is_string()) {
            model_id = ref->get<std::string>();
            model = store_->find(model_id);
            if (!model) return fail("unknown_model", "unknown model '" + model_id + "'", true);
        } else if (ref->is_object()) {
            model_id = "inline";
            model = std::make_shared<const TrainedModel>(model_from_json(*ref));
        } else {
            return fail("malformed", "\"model\" must be an id or a model document", true);
        }

        const auto object = message.find("object");
        if (object == message.end()) return fail("malformed", "init needs \"object\"", true);
        ObjectContext context = context_from_json(*object);

        WindowConfig window;
        const auto overrides = message.find("window");
        if (overrides != message.end() && !overrides->is_null()) window = window_from_json(*overrides);

        session_.emplace(std::move(context), std::move(model), window);
    } catch (const Error& e) {
        return fail("invalid_init", e.what(), true);
    }

    Reply reply;
    reply.messages.push_back(envelope(
        "ack", Json{{"ack", "init"}, {"model", model_id}, {"window", to_json(session_->window())}}));
    return reply;
}

Reply SessionHandler::handle_samples(const Json& message) {
    if (!session_) return fail("protocol", "first message must be init", true);

    const auto list = message.find("samples");
    if (list == message.end() || !list->is_array()) return fail("malformed", "samples needs a \"samples\" array", true);

    std::vector<GazeSample> samples;
    samples.reserve(list->size());
    try {
        for (const Json& s : *list) {
            if (!s.is_object()) throw FormatError("each sample must be an object");
            GazeSample g;
            for (const auto& [name, target] : {std::pair{"t_ms", &g.t_ms}, std::pair{"x", &g.x},
                                               std::pair{"y", &g.y}, std::pair{"confidence", &g.confidence}}) {
                const auto it = s.find(name);
                if (it == s.end() || !it->is_number()) {
                    throw FormatError(std::string("sample field '") + name + "' must be a number");
                }
                *target = it->get<double>();
            }
            samples.push_back(g);
        }
    } catch (const FormatError& e) {
        return fail("malformed", e.what(), true);
    }

    std::vector<IntentionEvent> events;
    try {
        events = session_->push_samples(samples);
    } catch (const InvalidInputError& e) {
        return fail("invalid_samples", e.what(), false);
    }

    Reply reply;
    for (const IntentionEvent& e : events) {
        for (const Fixation& f : e.fixations) {
            // Overlapping windows see the same fixation repeatedly; report it once.
            if (last_fixation_end_ && f.t_start_ms < *last_fixation_end_) continue;
            last_fixation_end_ = f.t_start_ms + f.duration_ms;
            reply.messages.push_back(envelope("fixation", Json{{"t_ms", e.t_ms}, {"fixation", to_json(f)}}));
        }
        if (e.window_features) {
            reply.messages.push_back(
                envelope("features", Json{{"t_ms", e.t_ms}, {"features", to_json(*e.window_features)}}));
        }
        reply.messages.push_back(envelope(
            "intention", Json{{"t_ms", e.t_ms}, {"label", to_string(e.label)}, {"fired", e.fired}}));
    }
    Json ack{{"ack", "samples"}, {"count", samples.size()}};
    if (!samples.empty()) ack["t_ms"] = samples.back().t_ms;
    reply.messages.push_back(envelope("ack", std::move(ack)));
    return reply;
}

namespace protocol {

Json init_message(const ObjectContext& context, std::optional<std::string> model_id,
                  std::optional<Json> window_overrides) {
    Json m{{"v", kProtocolVersion}, {"type", "init"}, {"object", to_json(context)}};
    if (model_id) m["model"] = *model_id;
    if (window_overrides) m["window"] = *window_overrides;
    return m;
}

Json samples_message(std::span<const GazeSample> samples) {
    Json list = Json::array();
    for (const GazeSample& s : samples) {
        list.push_back(Json{{"t_ms", s.t_ms}, {"x", s.x}, {"y", s.y}, {"confidence", s.confidence}});
    }
    return Json{{"v", kProtocolVersion}, {"type", "samples"}, {"samples", std::move(list)}};
}

}  // namespace protocol

}  // namespace gazeintent
