#pragma once

#include "hmrag/answer.hpp"
#include "hmrag/decision_agent.hpp"
#include "hmrag/model_gateway.hpp"
#include "hmrag/prompts.hpp"
#include "hmrag/web_agent.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

/// Flat `key = value` settings with dotted keys. Blank lines and lines
/// starting with '#' are ignored; later keys override earlier ones.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::string& path);

    void set(std::string key, std::string value);
    std::optional<std::string> get(std::string_view key) const;
    bool contains(std::string_view key) const { return get(key).has_value(); }

    const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }
    std::string dump() const;

private:
    std::map<std::string, std::string, std::less<>> entries_;
};

/// Settings for one backend role. `kind` selects the implementation:
/// chat roles take http, scripted or inherit (use the chat backend);
/// embedding takes http or hashing; caption takes http, scripted or none.
struct BackendSettings {
    std::string kind = "http";
    ModelBackendConfig http;
    std::string script_path;
    std::size_t hashing_dim = 64;
};

/// Agent switches plus the per-agent parameters the orchestrator needs.
struct PipelineConfig {
    std::set<Source> enabled_agents = {Source::vector, Source::graph, Source::web};
    bool decision_enabled = true;
    double agent_timeout_s = 30.0;
    std::size_t top_k = 5;
    double tau = 0.3;
    SearchConfig search;
    DecisionConfig decision;

    void validate() const;
};

struct WebSettings {
    std::string kind = "serper";
    ModelBackendConfig http;
    std::string stub_fixture_path;
};

/// Everything the CLI can configure. Relative file paths are resolved
/// against the directory of the config file they came from.
struct HmragConfig {
    BackendSettings chat;
    BackendSettings lightweight_chat;
    BackendSettings expert_chat;
    BackendSettings embedding;
    BackendSettings caption;
    WebSettings web;
    std::size_t chunk_size = 512;
    std::size_t chunk_overlap = 64;
    std::string prompts_dir;
    /// Prompt template name -> replacement file.
    std::map<std::string, std::string> prompt_files;
    PipelineConfig pipeline;

    static HmragConfig defaults();
    /// Applies `kv` over the defaults. Unknown keys are rejected.
    static HmragConfig from_key_values(const KeyValueConfig& kv, const std::string& base_dir = {});
    /// Loads `path`, or the HMRAG_CONFIG file, or returns the defaults.
    static HmragConfig load(const std::optional<std::string>& path);

    KeyValueConfig to_key_values() const;
};

ModelGateway make_gateway(const HmragConfig& config);
std::shared_ptr<const SearchClient> make_search_client(const HmragConfig& config);
PromptLibrary make_prompts(const HmragConfig& config);

}  // namespace hmrag
