#include "hmrag/http_backends.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <thread>

namespace hmrag {

namespace {

using nlohmann::json;

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(bytes.data()),
                            static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string mime_for(const std::filesystem::path& p) {
    auto ext = to_lower(p.extension().string());
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    if (ext == ".bmp") return "image/bmp";
    return "application/octet-stream";
}

json parse_body(const std::string& body) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("backend response is not JSON: ") + e.what(), body);
    }
}

}  // namespace

JsonHttpClient::JsonHttpClient(ModelBackendConfig config, AuthStyle auth)
    : config_(std::move(config)), auth_(auth) {
    config_.validate();
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url_re))
        throw InvalidArgument("endpoint is not an http(s) URL: " + config_.endpoint);
    scheme_host_port_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
}

std::vector<std::pair<std::string, std::string>> JsonHttpClient::headers() const {
    std::vector<std::pair<std::string, std::string>> out;
    if (config_.api_key_env.empty()) return out;
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
        throw InvalidArgument("environment variable " + config_.api_key_env + " is not set");
    if (auth_ == AuthStyle::bearer)
        out.emplace_back("Authorization", std::string("Bearer ") + key);
    else
        out.emplace_back("X-API-KEY", key);
    return out;
}

std::string JsonHttpClient::post(const json& body) const {
    httplib::Headers hdrs;
    for (auto& [k, v] : headers()) hdrs.emplace(k, v);
    const std::string payload = body.dump();
    const auto timeout = std::chrono::duration<double>(config_.timeout_s);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
    const auto secs = static_cast<time_t>(micros.count() / 1000000);
    const auto usecs = static_cast<time_t>(micros.count() % 1000000);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
        httplib::Client cli(scheme_host_port_);
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        auto res = cli.Post(path_, hdrs, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        throw BackendRejected(config_.endpoint + " answered HTTP " + std::to_string(res->status) +
                              ": " + res->body);
    }
    throw BackendUnavailable(config_.endpoint + " unavailable after " +
                             std::to_string(config_.retries + 1) + " attempt(s): " + last_error);
}

HttpChatModel::HttpChatModel(ModelBackendConfig config) : client_(std::move(config)) {}

std::string HttpChatModel::complete(std::span<const ChatTurn> turns,
                                    const DecodingParams& params) const {
    json messages = json::array();
    for (const auto& t : turns)
        messages.push_back({{"role", to_string(t.role)}, {"content", t.content}});
    json body = {{"model", client_.config().model_name},
                 {"messages", std::move(messages)},
                 {"temperature", params.temperature},
                 {"top_p", params.top_p},
                 {"max_tokens", params.max_tokens}};
    const std::string raw = client_.post(body);
    json j = parse_body(raw);
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("unexpected chat completion shape: ") + e.what(), raw);
    }
}

HttpEmbeddingModel::HttpEmbeddingModel(ModelBackendConfig config) : client_(std::move(config)) {}

Vector HttpEmbeddingModel::embed(std::string_view text) const {
    json body = {{"model", client_.config().model_name}, {"input", std::string(text)}};
    const std::string raw = client_.post(body);
    json j = parse_body(raw);
    try {
        return j.at("data").at(0).at("embedding").get<Vector>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("unexpected embedding shape: ") + e.what(), raw);
    }
}

HttpCaptionModel::HttpCaptionModel(ModelBackendConfig config, std::string instruction)
    : client_(std::move(config)), instruction_(std::move(instruction)) {}

std::string HttpCaptionModel::resolve_image_url(std::string_view image_ref) {
    if (starts_with_icase(image_ref, "http://") || starts_with_icase(image_ref, "https://") ||
        starts_with_icase(image_ref, "data:"))
        return std::string(image_ref);
    std::filesystem::path p{std::string(image_ref)};
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec))
        throw InvalidArgument("unresolvable image_ref: " + std::string(image_ref));
    return "data:" + mime_for(p) + ";base64," + base64_encode(read_file(p.string()));
}

std::string HttpCaptionModel::caption(std::string_view image_ref) const {
    const std::string url = resolve_image_url(image_ref);
    json content = json::array({
        {{"type", "text"}, {"text", instruction_}},
        {{"type", "image_url"}, {"image_url", {{"url", url}}}},
    });
    DecodingParams params;
    json body = {{"model", client_.config().model_name},
                 {"messages", json::array({{{"role", "user"}, {"content", std::move(content)}}})},
                 {"temperature", params.temperature},
                 {"top_p", params.top_p},
                 {"max_tokens", params.max_tokens}};
    const std::string raw = client_.post(body);
    json j = parse_body(raw);
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("unexpected caption response shape: ") + e.what(), raw);
    }
}

}  // namespace hmrag
