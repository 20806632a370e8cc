#include "hmrag/scripted_backends.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace hmrag {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

void ScriptedChatModel::add(std::span<const ChatTurn> turns, std::string response) {
    table_[turns_hash(turns)] = std::move(response);
}

void ScriptedChatModel::add_prompt(const std::string& user_prompt, std::string response) {
    const ChatTurn t{Role::user, user_prompt};
    add(std::span<const ChatTurn>(&t, 1), std::move(response));
}

void ScriptedChatModel::add_hash(std::string hash, std::string response) {
    table_[std::move(hash)] = std::move(response);
}

void ScriptedChatModel::add_responder(Responder responder) {
    responders_.push_back(std::move(responder));
}

std::shared_ptr<ScriptedChatModel> ScriptedChatModel::from_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open chat script: " + path);
    auto model = std::make_shared<ScriptedChatModel>();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            std::string response = j.at("response").get<std::string>();
            if (j.contains("hash")) {
                model->add_hash(j["hash"].get<std::string>(), std::move(response));
            } else if (j.contains("prompt")) {
                model->add_prompt(j["prompt"].get<std::string>(), std::move(response));
            } else {
                std::vector<ChatTurn> turns;
                for (const auto& t : j.at("turns"))
                    turns.push_back({role_from_string(t.at("role").get<std::string>()),
                                     t.at("content").get<std::string>()});
                model->add(turns, std::move(response));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(), line);
        }
    }
    return model;
}

std::string ScriptedChatModel::complete(std::span<const ChatTurn> turns,
                                        const DecodingParams&) const {
    ++calls_;
    {
        std::lock_guard lock(history_mutex_);
        history_.push_back(render_turns(turns));
    }
    const std::string key = turns_hash(turns);
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    for (const auto& r : responders_) {
        if (auto out = r(turns)) return *out;
    }
    std::string preview = render_turns(turns).substr(0, 160);
    throw ScriptMiss("scripted chat has no entry for hash " + key + ": " + preview);
}

std::vector<std::string> ScriptedChatModel::history() const {
    std::lock_guard lock(history_mutex_);
    return history_;
}

HashingEmbeddingModel::HashingEmbeddingModel(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw InvalidArgument("embedding dimension must be positive");
}

Vector HashingEmbeddingModel::embed(std::string_view text) const {
    if (text.empty()) throw InvalidArgument("embed: text is empty");
    auto tokens = word_tokens(text);
    if (tokens.empty()) tokens.emplace_back(text);  // punctuation-only input

    Vector v(dim_, 0.0);
    for (const auto& tok : tokens) {
        std::uint64_t state = fnv1a64(tok, kFnvOffset ^ seed_);
        for (auto& x : v) {
            // 53 random bits mapped to [-1, 1).
            double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
            x += 2.0 * u - 1.0;
        }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (auto& x : v) x /= norm;
    return v;
}

ScriptedCaptionModel::ScriptedCaptionModel(std::map<std::string, std::string> captions)
    : captions_(captions.begin(), captions.end()) {}

ScriptedCaptionModel ScriptedCaptionModel::from_json_file(const std::string& path) {
    ScriptedCaptionModel model;
    try {
        auto j = nlohmann::json::parse(read_file(path));
        for (auto& [k, v] : j.items()) model.add(k, v.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return model;
}

void ScriptedCaptionModel::add(std::string image_ref, std::string caption) {
    captions_[std::move(image_ref)] = std::move(caption);
}

std::string ScriptedCaptionModel::caption(std::string_view image_ref) const {
    if (auto it = captions_.find(image_ref); it != captions_.end()) return it->second;
    throw ScriptMiss("scripted caption has no entry for " + std::string(image_ref));
}

}  // namespace hmrag
