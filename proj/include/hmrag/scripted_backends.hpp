#pragma once

#include "hmrag/model_gateway.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hmrag {

/// Deterministic chat double.
///
/// Responses are looked up by the canonical hash of the complete turn list.
/// Tests with many generated prompts can also install responders, which are
/// consulted in order after the exact table; a responder returns nullopt to
/// decline. A request nobody answers raises ScriptMiss, never a fallback.
class ScriptedChatModel final : public ChatModel {
public:
    using Responder = std::function<std::optional<std::string>(std::span<const ChatTurn>)>;

    void add(std::span<const ChatTurn> turns, std::string response);
    void add_prompt(const std::string& user_prompt, std::string response);
    void add_hash(std::string hash, std::string response);
    void add_responder(Responder responder);

    /// JSON-lines script: {"response": R} plus one of {"hash": H},
    /// {"prompt": P} or {"turns": [{"role", "content"}...]}.
    static std::shared_ptr<ScriptedChatModel> from_jsonl(const std::string& path);

    std::string complete(std::span<const ChatTurn> turns,
                         const DecodingParams& params) const override;

    std::size_t call_count() const { return calls_.load(); }
    /// Every rendered request seen so far, in arrival order.
    std::vector<std::string> history() const;

private:
    std::map<std::string, std::string> table_;
    std::vector<Responder> responders_;
    mutable std::atomic<std::size_t> calls_{0};
    mutable std::mutex history_mutex_;
    mutable std::vector<std::string> history_;
};

/// Embedding double: the sum of one pseudo-random vector per token of the
/// input (the token multiset), normalized to unit length. Identical token
/// multisets map to identical vectors; overlapping ones to nearby vectors.
class HashingEmbeddingModel final : public EmbeddingModel {
public:
    explicit HashingEmbeddingModel(std::size_t dim, std::uint64_t seed = 0);
    Vector embed(std::string_view text) const override;
    std::size_t dim() const { return dim_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Caption double backed by a fixed image_ref -> caption table.
class ScriptedCaptionModel final : public CaptionModel {
public:
    ScriptedCaptionModel() = default;
    explicit ScriptedCaptionModel(std::map<std::string, std::string> captions);

    /// JSON object file mapping image_ref to caption.
    static ScriptedCaptionModel from_json_file(const std::string& path);

    void add(std::string image_ref, std::string caption);
    std::string caption(std::string_view image_ref) const override;

private:
    std::map<std::string, std::string, std::less<>> captions_;
};

}  // namespace hmrag
