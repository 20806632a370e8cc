#pragma once

#include "hmrag/answer.hpp"
#include "hmrag/model_gateway.hpp"
#include "hmrag/prompts.hpp"

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

/// Search parameters: result count, interface language, result type.
struct SearchConfig {
    int num_results = 5;
    std::string language = "en";
    std::string type = "web";

    void validate() const;
};

struct SearchResult {
    std::string title;
    std::string snippet;
    std::string url;
    int position = 0;

    bool operator==(const SearchResult&) const = default;
};

/// Returns the raw JSON body of a search response.
class SearchClient {
public:
    virtual ~SearchClient() = default;
    virtual std::string fetch(const std::string& query, const SearchConfig& config) const = 0;
};

/// Live Serper-compatible client: POST {q, num, hl} with an X-API-KEY header.
class SerperSearchClient final : public SearchClient {
public:
    explicit SerperSearchClient(ModelBackendConfig config);
    std::string fetch(const std::string& query, const SearchConfig& config) const override;

private:
    ModelBackendConfig config_;
};

/// Serves canned responses from a JSON object mapping query -> response
/// body. Unknown queries get an empty organic list.
class StubSearchClient final : public SearchClient {
public:
    StubSearchClient() = default;
    explicit StubSearchClient(std::map<std::string, std::string> responses);
    static StubSearchClient from_fixture(const std::string& path);

    void add(std::string query, std::string response_body);
    std::string fetch(const std::string& query, const SearchConfig& config) const override;

private:
    std::map<std::string, std::string> responses_;
};

/// Reads the `organic` array. Results are sorted by position and cut to
/// `num_results`. Duplicate positions or empty URLs are rejected.
std::vector<SearchResult> parse_search_response(const std::string& body,
                                                const SearchConfig& config);

class WebRetrievalAgent {
public:
    WebRetrievalAgent(std::shared_ptr<const SearchClient> client, SearchConfig config,
                      PromptLibrary prompts);

    /// Records the call in `log` when given.
    std::vector<SearchResult> search(const std::string& query, CallLog* log = nullptr) const;

    AnswerCandidate answer(const std::string& query, std::span<const SearchResult> results,
                           const ModelGateway& gateway) const;

    /// "[position] title — snippet (url)" per result.
    static std::string format_results(std::span<const SearchResult> results);

    const SearchConfig& config() const { return config_; }

private:
    std::shared_ptr<const SearchClient> client_;
    SearchConfig config_;
    PromptLibrary prompts_;
};

}  // namespace hmrag
