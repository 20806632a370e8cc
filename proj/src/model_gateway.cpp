#include "hmrag/model_gateway.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

namespace hmrag {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw InvalidArgument("unknown chat role: " + std::string(name));
}

std::string_view to_string(ModelRole role) {
    switch (role) {
        case ModelRole::chat: return "chat";
        case ModelRole::lightweight_chat: return "lightweight_chat";
        case ModelRole::expert_chat: return "expert_chat";
        case ModelRole::embedding: return "embedding";
        case ModelRole::caption: return "caption";
        case ModelRole::search: return "search";
    }
    return "chat";
}

void DecodingParams::validate() const {
    if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw InvalidArgument("top_p must be in (0, 1]");
    if (max_tokens <= 0) throw InvalidArgument("max_tokens must be positive");
}

void ModelBackendConfig::validate() const {
    if (endpoint.empty()) throw InvalidArgument("backend endpoint is empty");
    if (!(timeout_s > 0.0)) throw InvalidArgument("backend timeout must be > 0");
    if (retries < 0) throw InvalidArgument("backend retries must be >= 0");
}

void CallLog::append(CallRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
}

std::vector<CallRecord> CallLog::snapshot() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t CallLog::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::string turns_hash(std::span<const ChatTurn> turns) {
    std::uint64_t h = kFnvOffset;
    for (const auto& t : turns) {
        h = fnv1a64(to_string(t.role), h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(t.content, h);
        h = fnv1a64("\x1e", h);
    }
    return to_hex(h);
}

std::string render_turns(std::span<const ChatTurn> turns) {
    if (turns.size() == 1) return turns.front().content;
    std::string out;
    for (const auto& t : turns) {
        if (!out.empty()) out += "\n";
        out += "[";
        out += to_string(t.role);
        out += "] ";
        out += t.content;
    }
    return out;
}

ModelGateway::ModelGateway() : dim_(std::make_shared<std::atomic<std::size_t>>(0)) {}

void ModelGateway::set_chat(ModelRole role, std::shared_ptr<const ChatModel> model) {
    switch (role) {
        case ModelRole::chat: chat_ = std::move(model); break;
        case ModelRole::lightweight_chat: lightweight_ = std::move(model); break;
        case ModelRole::expert_chat: expert_ = std::move(model); break;
        default: throw InvalidArgument("not a chat role: " + std::string(to_string(role)));
    }
}

void ModelGateway::set_embedding(std::shared_ptr<const EmbeddingModel> model) {
    embedding_ = std::move(model);
    dim_->store(0);
}

void ModelGateway::set_caption(std::shared_ptr<const CaptionModel> model) {
    caption_ = std::move(model);
}

const ChatModel& ModelGateway::chat_for(ModelRole role) const {
    const ChatModel* m = nullptr;
    if (role == ModelRole::lightweight_chat) m = lightweight_.get();
    if (role == ModelRole::expert_chat) m = expert_.get();
    if (!m) m = chat_.get();
    if (!m) throw InvalidArgument("no chat backend configured");
    return *m;
}

std::string ModelGateway::complete_chat(std::span<const ChatTurn> turns,
                                        const DecodingParams& params, ModelRole role) const {
    if (turns.empty()) throw InvalidArgument("complete_chat: turn list is empty");
    for (const auto& t : turns) {
        if (t.role == Role::user && t.content.empty())
            throw InvalidArgument("complete_chat: user turn is empty");
    }
    params.validate();
    const ChatModel& model = chat_for(role);
    try {
        std::string out = model.complete(turns, params);
        record({role, render_turns(turns), out, true});
        return out;
    } catch (const Error& e) {
        record({role, render_turns(turns), e.what(), false});
        throw;
    }
}

std::string ModelGateway::complete_prompt(std::string prompt, ModelRole role,
                                          const DecodingParams& params) const {
    const ChatTurn turn{Role::user, std::move(prompt)};
    return complete_chat(std::span<const ChatTurn>(&turn, 1), params, role);
}

Vector ModelGateway::embed_text(std::string_view text) const {
    if (text.empty()) throw InvalidArgument("embed_text: text is empty");
    if (!embedding_) throw InvalidArgument("no embedding backend configured");
    Vector v;
    try {
        v = embedding_->embed(text);
    } catch (const Error& e) {
        record({ModelRole::embedding, std::string(text), e.what(), false});
        throw;
    }
    if (v.empty()) throw BackendRejected("embedding backend returned an empty vector");
    std::size_t expected = 0;
    if (!dim_->compare_exchange_strong(expected, v.size()) && expected != v.size()) {
        throw DimensionMismatch("embedding dimension changed from " + std::to_string(expected) +
                                " to " + std::to_string(v.size()));
    }
    record({ModelRole::embedding, std::string(text), "dim=" + std::to_string(v.size()), true});
    return v;
}

std::string ModelGateway::caption_image(std::string_view image_ref) const {
    if (image_ref.empty()) throw InvalidArgument("caption_image: image_ref is empty");
    if (!caption_) throw InvalidArgument("no caption backend configured");
    try {
        std::string out = caption_->caption(image_ref);
        record({ModelRole::caption, std::string(image_ref), out, true});
        return out;
    } catch (const Error& e) {
        record({ModelRole::caption, std::string(image_ref), e.what(), false});
        throw;
    }
}

std::optional<std::size_t> ModelGateway::embedding_dim() const {
    std::size_t d = dim_->load();
    if (d == 0) return std::nullopt;
    return d;
}

ModelGateway ModelGateway::with_log(std::shared_ptr<CallLog> log) const {
    ModelGateway copy = *this;
    copy.log_ = std::move(log);
    return copy;
}

void ModelGateway::record(CallRecord record) const {
    if (log_) log_->append(std::move(record));
}

}  // namespace hmrag
