#include "hmrag/web_agent.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/http_backends.hpp"
#include "hmrag/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace hmrag {

using nlohmann::json;

void SearchConfig::validate() const {
    if (num_results < 1) throw InvalidArgument("num_results must be at least 1");
}

SerperSearchClient::SerperSearchClient(ModelBackendConfig config) : config_(std::move(config)) {
    config_.validate();
}

std::string SerperSearchClient::fetch(const std::string& query, const SearchConfig& config) const {
    JsonHttpClient client(config_, AuthStyle::x_api_key);
    return client.post({{"q", query}, {"num", config.num_results}, {"hl", config.language}});
}

StubSearchClient::StubSearchClient(std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

StubSearchClient StubSearchClient::from_fixture(const std::string& path) {
    StubSearchClient stub;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(path + ": fixture must be a JSON object");
    for (auto& [query, response] : j.items())
        stub.add(query, response.is_string() ? response.get<std::string>() : response.dump());
    return stub;
}

void StubSearchClient::add(std::string query, std::string response_body) {
    responses_[std::move(query)] = std::move(response_body);
}

std::string StubSearchClient::fetch(const std::string& query, const SearchConfig&) const {
    if (auto it = responses_.find(query); it != responses_.end()) return it->second;
    return R"({"organic":[]})";
}

std::vector<SearchResult> parse_search_response(const std::string& body,
                                                const SearchConfig& config) {
    config.validate();
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("search response is not JSON: ") + e.what(), body);
    }
    std::vector<SearchResult> results;
    if (!j.is_object()) throw ParseError("search response is not an object", body);
    if (!j.contains("organic")) return results;
    const auto& organic = j["organic"];
    if (!organic.is_array()) throw ParseError("`organic` is not a list", body);

    std::set<int> positions;
    for (std::size_t i = 0; i < organic.size(); ++i) {
        const auto& item = organic[i];
        SearchResult r;
        try {
            r.title = item.value("title", std::string{});
            r.snippet = item.value("snippet", std::string{});
            r.url = item.value("link", std::string{});
            r.position = item.contains("position") ? item["position"].get<int>()
                                                   : static_cast<int>(i) + 1;
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed organic result: ") + e.what(), body);
        }
        if (r.url.empty())
            throw InvalidArgument("search result " + std::to_string(r.position) + " has no URL");
        if (r.position < 1) throw InvalidArgument("search result position must be positive");
        if (!positions.insert(r.position).second)
            throw InvalidArgument("duplicate search result position " + std::to_string(r.position));
        results.push_back(std::move(r));
    }
    std::sort(results.begin(), results.end(),
              [](const SearchResult& a, const SearchResult& b) { return a.position < b.position; });
    if (results.size() > static_cast<std::size_t>(config.num_results))
        results.resize(static_cast<std::size_t>(config.num_results));
    return results;
}

WebRetrievalAgent::WebRetrievalAgent(std::shared_ptr<const SearchClient> client,
                                     SearchConfig config, PromptLibrary prompts)
    : client_(std::move(client)), config_(std::move(config)), prompts_(std::move(prompts)) {
    if (!client_) throw InvalidArgument("web agent needs a search client");
    config_.validate();
}

std::vector<SearchResult> WebRetrievalAgent::search(const std::string& query, CallLog* log) const {
    if (trim(query).empty()) throw InvalidArgument("search query is empty");
    std::string body;
    try {
        body = client_->fetch(query, config_);
        auto results = parse_search_response(body, config_);
        if (log) log->append({ModelRole::search, query, std::to_string(results.size()) + " result(s)", true});
        return results;
    } catch (const Error& e) {
        if (log) log->append({ModelRole::search, query, body.empty() ? e.what() : body, false});
        throw;
    }
}

std::string WebRetrievalAgent::format_results(std::span<const SearchResult> results) {
    std::string out;
    for (const auto& r : results) {
        if (!out.empty()) out += "\n";
        out += "[" + std::to_string(r.position) + "] " + r.title + " — " + r.snippet + " (" + r.url +
               ")";
    }
    return out;
}

AnswerCandidate WebRetrievalAgent::answer(const std::string& query,
                                          std::span<const SearchResult> results,
                                          const ModelGateway& gateway) const {
    AnswerCandidate c;
    c.source = Source::web;
    for (const auto& r : results) c.evidence.push_back(r.url);
    const std::string listing = results.empty()
                                    ? std::string("(no web evidence was found for this question)")
                                    : format_results(results);
    try {
        c.text = trim(gateway.complete_prompt(
            prompts_.web_answer.render({{"question", query}, {"results", listing}})));
    } catch (const BackendError& e) {
        return AnswerCandidate::unavailable(Source::web, e.what());
    }
    return c;
}

}  // namespace hmrag
