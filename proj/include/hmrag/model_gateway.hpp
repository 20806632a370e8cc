#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

using Vector = std::vector<double>;

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

/// Decoding knobs forwarded to chat backends. The defaults are the
/// deterministic setting every agent uses: greedy decoding, no nucleus cut.
struct DecodingParams {
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 1024;

    void validate() const;
};

struct ChatTurn {
    Role role = Role::user;
    std::string content;
};

/// Connection settings for one HTTP model backend. The API key is never
/// stored here, only the name of the environment variable holding it.
struct ModelBackendConfig {
    std::string endpoint;
    std::string model_name;
    std::string api_key_env;
    double timeout_s = 60.0;
    int retries = 2;

    void validate() const;
};

/// Logical model roles. The lightweight and expert roles fall back to the
/// plain chat backend when not configured separately.
enum class ModelRole { chat, lightweight_chat, expert_chat, embedding, caption, search };

std::string_view to_string(ModelRole role);

class ChatModel {
public:
    virtual ~ChatModel() = default;
    /// Must be safe to call concurrently.
    virtual std::string complete(std::span<const ChatTurn> turns,
                                 const DecodingParams& params) const = 0;
};

class EmbeddingModel {
public:
    virtual ~EmbeddingModel() = default;
    virtual Vector embed(std::string_view text) const = 0;
};

class CaptionModel {
public:
    virtual ~CaptionModel() = default;
    virtual std::string caption(std::string_view image_ref) const = 0;
};

/// One backend interaction as it appears in a query trace.
struct CallRecord {
    ModelRole role = ModelRole::chat;
    std::string request;
    std::string response;
    bool ok = true;

    bool operator==(const CallRecord&) const = default;
};

/// Append-only, thread-safe list of backend calls.
class CallLog {
public:
    void append(CallRecord record);
    std::vector<CallRecord> snapshot() const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<CallRecord> records_;
};

/// Canonical hash of a turn sequence, used as the key of scripted doubles.
std::string turns_hash(std::span<const ChatTurn> turns);

/// Flattens turns into the text recorded in traces.
std::string render_turns(std::span<const ChatTurn> turns);

/// Uniform access to the chat, embedding and caption backends.
///
/// A gateway is a cheap value: copies share backends and the fixed embedding
/// dimension. `with_log` returns a copy that additionally records every call
/// into the given log, which is how the orchestrator attributes calls to the
/// agent that made them.
class ModelGateway {
public:
    ModelGateway();

    void set_chat(ModelRole role, std::shared_ptr<const ChatModel> model);
    void set_embedding(std::shared_ptr<const EmbeddingModel> model);
    void set_caption(std::shared_ptr<const CaptionModel> model);

    std::string complete_chat(std::span<const ChatTurn> turns, const DecodingParams& params = {},
                              ModelRole role = ModelRole::chat) const;

    /// Single user turn convenience wrapper.
    std::string complete_prompt(std::string prompt, ModelRole role = ModelRole::chat,
                                const DecodingParams& params = {}) const;

    Vector embed_text(std::string_view text) const;
    std::string caption_image(std::string_view image_ref) const;

    /// Dimension fixed by the first successful embedding, if any.
    std::optional<std::size_t> embedding_dim() const;

    ModelGateway with_log(std::shared_ptr<CallLog> log) const;
    const std::shared_ptr<CallLog>& log() const { return log_; }
    void record(CallRecord record) const;

private:
    const ChatModel& chat_for(ModelRole role) const;

    std::shared_ptr<const ChatModel> chat_;
    std::shared_ptr<const ChatModel> lightweight_;
    std::shared_ptr<const ChatModel> expert_;
    std::shared_ptr<const EmbeddingModel> embedding_;
    std::shared_ptr<const CaptionModel> caption_;
    std::shared_ptr<std::atomic<std::size_t>> dim_;
    std::shared_ptr<CallLog> log_;
};

}  // namespace hmrag
