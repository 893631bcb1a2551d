#pragma once

#include "gazeintent/io.hpp"
#include "gazeintent/stream.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gazeintent {

inline constexpr int kProtocolVersion = 1;

/// Immutable-after-setup registry of trained models shared by all sessions.
class ModelStore {
public:
    /// The first model added becomes the default.
    void add(std::string id, std::shared_ptr<const TrainedModel> model);
    /// Loads every *.json model in `dir`; ids are the file stems.
    void load_directory(const std::filesystem::path& dir);
    /// Loads one model file under its stem.
    void load_file(const std::filesystem::path& file);

    void set_default(const std::string& id);
    const std::string& default_id() const { return default_id_; }

    /// Null when unknown.
    std::shared_ptr<const TrainedModel> find(const std::string& id) const;
    std::vector<std::string> ids() const;
    bool empty() const { return models_.empty(); }

private:
    std::map<std::string, std::shared_ptr<const TrainedModel>> models_;
    std::string default_id_;
};

/// Messages produced in reply to one client message.
struct Reply {
    std::vector<std::string> messages;
    bool close = false;  ///< the channel must be closed after sending
};

/// Protocol state machine for one client connection, independent of the
/// transport. Client messages are init and samples; the server answers
/// with ack, fixation, features, intention and error messages, each
/// stamped with a per-session sequence number starting at 1.
///
/// Structural faults (bad JSON, unknown type, wrong version, samples before
/// init, a second init) produce an error and close the channel. A samples
/// batch with invalid or out-of-order samples is rejected with an error and
/// the session continues as if the batch had not been sent.
class SessionHandler {
public:
    explicit SessionHandler(std::shared_ptr<const ModelStore> store);

    Reply on_message(std::string_view text);

    bool initialized() const { return session_.has_value(); }
    bool closed() const { return closed_; }
    std::uint64_t last_seq() const { return seq_; }

private:
    Reply handle_init(const Json& message);
    Reply handle_samples(const Json& message);
    std::string envelope(std::string_view type, Json body);
    Reply fail(std::string_view code, const std::string& message, bool close);

    std::shared_ptr<const ModelStore> store_;
    std::optional<Session> session_;
    std::uint64_t seq_ = 0;
    std::optional<std::uint64_t> client_seq_;
    std::optional<double> last_fixation_end_;
    bool closed_ = false;
};

/// Client-side helpers for building protocol messages.
namespace protocol {

Json init_message(const ObjectContext& context, std::optional<std::string> model_id = std::nullopt,
                  std::optional<Json> window_overrides = std::nullopt);
Json samples_message(std::span<const GazeSample> samples);

}  // namespace protocol

}  // namespace gazeintent
