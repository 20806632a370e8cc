#pragma once

#include "hmrag/model_gateway.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace hmrag {

enum class AuthStyle { bearer, x_api_key };

/// POSTs JSON documents to one endpoint URL. A fresh connection is opened
/// per call so a client can be shared between threads.
///
/// Transport errors, 429 and 5xx answers are retried up to `retries` times;
/// other non-2xx answers fail immediately with BackendRejected.
class JsonHttpClient {
public:
    explicit JsonHttpClient(ModelBackendConfig config, AuthStyle auth = AuthStyle::bearer);

    /// Returns the raw response body of a 2xx answer.
    std::string post(const nlohmann::json& body) const;

    const ModelBackendConfig& config() const { return config_; }

private:
    std::vector<std::pair<std::string, std::string>> headers() const;

    ModelBackendConfig config_;
    AuthStyle auth_;
    std::string scheme_host_port_;
    std::string path_;
};

/// Chat-completions wire format: {model, messages[{role, content}],
/// temperature, top_p, max_tokens} -> choices[0].message.content.
class HttpChatModel final : public ChatModel {
public:
    explicit HttpChatModel(ModelBackendConfig config);
    std::string complete(std::span<const ChatTurn> turns,
                         const DecodingParams& params) const override;

private:
    JsonHttpClient client_;
};

/// Embeddings wire format: {model, input} -> data[0].embedding.
class HttpEmbeddingModel final : public EmbeddingModel {
public:
    explicit HttpEmbeddingModel(ModelBackendConfig config);
    Vector embed(std::string_view text) const override;

private:
    JsonHttpClient client_;
};

/// Captions images through a vision-capable chat-completions endpoint.
/// Local paths are inlined as base64 data URLs; http(s) and data URLs are
/// passed through unchanged.
class HttpCaptionModel final : public CaptionModel {
public:
    HttpCaptionModel(ModelBackendConfig config, std::string instruction);
    std::string caption(std::string_view image_ref) const override;

    /// Resolves an image reference to the URL sent on the wire. Throws
    /// InvalidArgument for a local path that does not exist.
    static std::string resolve_image_url(std::string_view image_ref);

private:
    JsonHttpClient client_;
    std::string instruction_;
};

}  // namespace hmrag
