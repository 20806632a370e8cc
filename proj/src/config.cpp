#include "hmrag/config.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/http_backends.hpp"
#include "hmrag/ingestion.hpp"
#include "hmrag/scripted_backends.hpp"
#include "hmrag/text.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>

namespace hmrag {

namespace {

namespace fs = std::filesystem;

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(key + ": expected a number, got '" + v + "'");
}

long long parse_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw InvalidArgument(key + ": expected an integer, got '" + v + "'");
    return out;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    long long n = parse_integer(key, v);
    if (n < 0) throw InvalidArgument(key + ": must not be negative");
    return static_cast<std::size_t>(n);
}

bool parse_bool(const std::string& key, const std::string& v) {
    const auto s = to_lower(v);
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw InvalidArgument(key + ": expected true or false, got '" + v + "'");
}

std::set<Source> parse_agents(const std::string& key, const std::string& v) {
    std::set<Source> out;
    std::string list = v;
    for (char& c : list)
        if (c == ',') c = ' ';
    for (const auto& name : split_whitespace(list)) {
        try {
            out.insert(source_from_string(name));
        } catch (const InvalidArgument&) {
            throw InvalidArgument(key + ": unknown agent '" + name + "'");
        }
    }
    return out;
}

std::string resolve_path(const std::string& base_dir, const std::string& v) {
    if (v.empty() || base_dir.empty()) return v;
    fs::path p(v);
    if (p.is_absolute()) return v;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

// Shortest text that parses back to the same double.
std::string format_double(double d) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, end);
}

using Setter = std::function<void(HmragConfig&, const std::string&)>;

void add_http_keys(std::map<std::string, Setter>& table, const std::string& prefix,
                   std::function<ModelBackendConfig&(HmragConfig&)> get) {
    table[prefix + ".endpoint"] = [get](HmragConfig& c, const std::string& v) { get(c).endpoint = v; };
    table[prefix + ".model_name"] = [get](HmragConfig& c, const std::string& v) { get(c).model_name = v; };
    table[prefix + ".api_key_env"] = [get](HmragConfig& c, const std::string& v) { get(c).api_key_env = v; };
    const std::string tkey = prefix + ".timeout_s";
    table[tkey] = [get, tkey](HmragConfig& c, const std::string& v) { get(c).timeout_s = parse_double(tkey, v); };
    const std::string rkey = prefix + ".retries";
    table[rkey] = [get, rkey](HmragConfig& c, const std::string& v) {
        get(c).retries = static_cast<int>(parse_integer(rkey, v));
    };
}

std::map<std::string, Setter> build_table(const std::string& base_dir) {
    std::map<std::string, Setter> t;

    const std::pair<const char*, BackendSettings HmragConfig::*> backends[] = {
        {"chat", &HmragConfig::chat},
        {"lightweight_chat", &HmragConfig::lightweight_chat},
        {"expert_chat", &HmragConfig::expert_chat},
        {"embedding", &HmragConfig::embedding},
        {"caption", &HmragConfig::caption},
    };
    for (const auto& [name, member] : backends) {
        const std::string prefix = name;
        auto m = member;
        t[prefix + ".backend"] = [m](HmragConfig& c, const std::string& v) { (c.*m).kind = to_lower(v); };
        t[prefix + ".script"] = [m, base_dir](HmragConfig& c, const std::string& v) {
            (c.*m).script_path = resolve_path(base_dir, v);
        };
        if (prefix == "embedding") {
            t["embedding.hashing_dim"] = [](HmragConfig& c, const std::string& v) {
                c.embedding.hashing_dim = parse_size("embedding.hashing_dim", v);
            };
        }
        add_http_keys(t, prefix, [m](HmragConfig& c) -> ModelBackendConfig& { return (c.*m).http; });
    }

    t["web.backend"] = [](HmragConfig& c, const std::string& v) { c.web.kind = to_lower(v); };
    t["web.search_endpoint"] = [](HmragConfig& c, const std::string& v) { c.web.http.endpoint = v; };
    t["web.api_key_env"] = [](HmragConfig& c, const std::string& v) { c.web.http.api_key_env = v; };
    t["web.timeout_s"] = [](HmragConfig& c, const std::string& v) {
        c.web.http.timeout_s = parse_double("web.timeout_s", v);
    };
    t["web.retries"] = [](HmragConfig& c, const std::string& v) {
        c.web.http.retries = static_cast<int>(parse_integer("web.retries", v));
    };
    t["web.num_results"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.search.num_results = static_cast<int>(parse_integer("web.num_results", v));
    };
    t["web.language"] = [](HmragConfig& c, const std::string& v) { c.pipeline.search.language = v; };
    t["web.type"] = [](HmragConfig& c, const std::string& v) { c.pipeline.search.type = v; };
    t["web.stub_fixture_path"] = [base_dir](HmragConfig& c, const std::string& v) {
        c.web.stub_fixture_path = resolve_path(base_dir, v);
    };

    t["ingest.chunk_size"] = [](HmragConfig& c, const std::string& v) {
        c.chunk_size = parse_size("ingest.chunk_size", v);
    };
    t["ingest.chunk_overlap"] = [](HmragConfig& c, const std::string& v) {
        c.chunk_overlap = parse_size("ingest.chunk_overlap", v);
    };

    t["vector.top_k"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.top_k = parse_size("vector.top_k", v);
    };
    t["graph.tau"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.tau = parse_double("graph.tau", v);
    };

    t["decision.fusion_lambda"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.decision.fusion_lambda = parse_double("decision.fusion_lambda", v);
    };
    t["decision.consensus_threshold"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.decision.consensus_threshold = parse_double("decision.consensus_threshold", v);
    };
    t["decision.bleu_max_n"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.decision.bleu_max_n = static_cast<int>(parse_integer("decision.bleu_max_n", v));
    };
    t["decision.summary_token_budget"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.decision.summary_token_budget =
            static_cast<int>(parse_integer("decision.summary_token_budget", v));
    };

    t["pipeline.enabled_agents"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.enabled_agents = parse_agents("pipeline.enabled_agents", v);
    };
    t["pipeline.decision_enabled"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.decision_enabled = parse_bool("pipeline.decision_enabled", v);
    };
    t["pipeline.agent_timeout_s"] = [](HmragConfig& c, const std::string& v) {
        c.pipeline.agent_timeout_s = parse_double("pipeline.agent_timeout_s", v);
    };

    t["prompts.dir"] = [base_dir](HmragConfig& c, const std::string& v) {
        c.prompts_dir = resolve_path(base_dir, v);
    };
    // Named per-template overrides, e.g. prompts.expert_refine = my_expert.txt.
    for (const auto& name : PromptLibrary::names()) {
        t["prompts." + name] = [name, base_dir](HmragConfig& c, const std::string& v) {
            c.prompt_files[name] = resolve_path(base_dir, v);
        };
    }
    // Shorthand keys grouped with the agent that uses the prompt.
    const std::pair<const char*, const char*> aliases[] = {
        {"vector.context_header_file", "vector_context_header"},
        {"graph.keyword_prompt_file", "keyword_extraction"},
        {"decision.lightweight_prompt_file", "lightweight_refine"},
        {"decision.expert_prompt_file", "expert_refine"},
        {"decomposition.judge_prompt_file", "judge_intent"},
        {"decomposition.decompose_prompt_file", "decompose"},
    };
    for (const auto& [key, name] : aliases) {
        std::string n = name;
        t[key] = [n, base_dir](HmragConfig& c, const std::string& v) {
            c.prompt_files[n] = resolve_path(base_dir, v);
        };
    }
    return t;
}

void put_backend(KeyValueConfig& kv, const std::string& prefix, const BackendSettings& b) {
    kv.set(prefix + ".backend", b.kind);
    kv.set(prefix + ".endpoint", b.http.endpoint);
    kv.set(prefix + ".model_name", b.http.model_name);
    kv.set(prefix + ".api_key_env", b.http.api_key_env);
    kv.set(prefix + ".timeout_s", format_double(b.http.timeout_s));
    kv.set(prefix + ".retries", std::to_string(b.http.retries));
    kv.set(prefix + ".script", b.script_path);
    if (prefix == "embedding") kv.set("embedding.hashing_dim", std::to_string(b.hashing_dim));
}

std::shared_ptr<const ChatModel> make_chat(const BackendSettings& b, const std::string& role) {
    if (b.kind == "http") return std::make_shared<HttpChatModel>(b.http);
    if (b.kind == "scripted") {
        if (b.script_path.empty()) throw InvalidArgument(role + ".script is required for a scripted backend");
        return ScriptedChatModel::from_jsonl(b.script_path);
    }
    if (b.kind == "inherit" && role != "chat") return nullptr;
    throw InvalidArgument(role + ".backend: unsupported value '" + b.kind + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + " has no '='", line);
        auto key = trim(std::string_view(s).substr(0, eq));
        if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + " has no key", line);
        out.set(std::move(key), trim(std::string_view(s).substr(eq + 1)));
    }
    return out;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) { return parse(read_file(path)); }

void KeyValueConfig::set(std::string key, std::string value) {
    entries_[std::move(key)] = std::move(value);
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::dump() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

void PipelineConfig::validate() const {
    if (enabled_agents.empty()) throw InvalidArgument("at least one retrieval agent must be enabled");
    if (!(agent_timeout_s > 0.0)) throw InvalidArgument("agent timeout must be positive");
    if (top_k == 0) throw InvalidArgument("top_k must be positive");
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0, 1]");
    search.validate();
    decision.validate();
}

HmragConfig HmragConfig::defaults() {
    HmragConfig c;
    c.chat.http = {"https://api.openai.com/v1/chat/completions", "gpt-4o-mini", "OPENAI_API_KEY"};
    c.lightweight_chat.kind = "inherit";
    c.expert_chat.kind = "inherit";
    c.embedding.http = {"https://api.openai.com/v1/embeddings", "text-embedding-3-small",
                        "OPENAI_API_KEY"};
    c.caption.http = {"https://api.openai.com/v1/chat/completions", "gpt-4o", "OPENAI_API_KEY"};
    c.web.http = {"https://google.serper.dev/search", "", "SERPER_API_KEY"};
    c.chunk_size = kDefaultChunkSize;
    c.chunk_overlap = kDefaultChunkOverlap;
    return c;
}

HmragConfig HmragConfig::from_key_values(const KeyValueConfig& kv, const std::string& base_dir) {
    HmragConfig c = defaults();
    const auto table = build_table(base_dir);
    // The result count follows top_k unless set explicitly.
    bool num_results_set = kv.contains("web.num_results");
    for (const auto& [key, value] : kv.entries()) {
        auto it = table.find(key);
        if (it == table.end()) throw InvalidArgument("unknown config key: " + key);
        it->second(c, value);
    }
    if (!num_results_set) c.pipeline.search.num_results = static_cast<int>(c.pipeline.top_k);
    if (c.chunk_overlap >= c.chunk_size)
        throw InvalidArgument("ingest.chunk_overlap must be smaller than ingest.chunk_size");
    c.pipeline.validate();
    return c;
}

HmragConfig HmragConfig::load(const std::optional<std::string>& path) {
    std::string p;
    if (path && !path->empty()) {
        p = *path;
    } else if (const char* env = std::getenv("HMRAG_CONFIG"); env && *env) {
        p = env;
    } else {
        return defaults();
    }
    const auto base = fs::path(p).parent_path().string();
    return from_key_values(KeyValueConfig::load(p), base);
}

KeyValueConfig HmragConfig::to_key_values() const {
    KeyValueConfig kv;
    put_backend(kv, "chat", chat);
    put_backend(kv, "lightweight_chat", lightweight_chat);
    put_backend(kv, "expert_chat", expert_chat);
    put_backend(kv, "embedding", embedding);
    put_backend(kv, "caption", caption);
    kv.set("web.backend", web.kind);
    kv.set("web.search_endpoint", web.http.endpoint);
    kv.set("web.api_key_env", web.http.api_key_env);
    kv.set("web.timeout_s", format_double(web.http.timeout_s));
    kv.set("web.retries", std::to_string(web.http.retries));
    kv.set("web.num_results", std::to_string(pipeline.search.num_results));
    kv.set("web.language", pipeline.search.language);
    kv.set("web.type", pipeline.search.type);
    kv.set("web.stub_fixture_path", web.stub_fixture_path);
    kv.set("ingest.chunk_size", std::to_string(chunk_size));
    kv.set("ingest.chunk_overlap", std::to_string(chunk_overlap));
    kv.set("vector.top_k", std::to_string(pipeline.top_k));
    kv.set("graph.tau", format_double(pipeline.tau));
    kv.set("decision.fusion_lambda", format_double(pipeline.decision.fusion_lambda));
    kv.set("decision.consensus_threshold", format_double(pipeline.decision.consensus_threshold));
    kv.set("decision.bleu_max_n", std::to_string(pipeline.decision.bleu_max_n));
    kv.set("decision.summary_token_budget", std::to_string(pipeline.decision.summary_token_budget));
    std::vector<std::string> agents;
    for (auto s : pipeline.enabled_agents) agents.emplace_back(to_string(s));
    kv.set("pipeline.enabled_agents", join(agents, ","));
    kv.set("pipeline.decision_enabled", pipeline.decision_enabled ? "true" : "false");
    kv.set("pipeline.agent_timeout_s", format_double(pipeline.agent_timeout_s));
    kv.set("prompts.dir", prompts_dir);
    for (const auto& [name, path] : prompt_files) kv.set("prompts." + name, path);
    return kv;
}

PromptLibrary make_prompts(const HmragConfig& config) {
    auto prompts = PromptLibrary::defaults();
    if (!config.prompts_dir.empty()) prompts.load_overrides(config.prompts_dir);
    for (const auto& [name, path] : config.prompt_files) prompts.override_from_file(name, path);
    return prompts;
}

ModelGateway make_gateway(const HmragConfig& config) {
    ModelGateway gw;
    gw.set_chat(ModelRole::chat, make_chat(config.chat, "chat"));
    if (auto m = make_chat(config.lightweight_chat, "lightweight_chat"))
        gw.set_chat(ModelRole::lightweight_chat, m);
    if (auto m = make_chat(config.expert_chat, "expert_chat")) gw.set_chat(ModelRole::expert_chat, m);

    const auto& e = config.embedding;
    if (e.kind == "http") {
        gw.set_embedding(std::make_shared<HttpEmbeddingModel>(e.http));
    } else if (e.kind == "hashing") {
        gw.set_embedding(std::make_shared<HashingEmbeddingModel>(e.hashing_dim));
    } else {
        throw InvalidArgument("embedding.backend: unsupported value '" + e.kind + "'");
    }

    const auto& c = config.caption;
    if (c.kind == "http") {
        gw.set_caption(std::make_shared<HttpCaptionModel>(
            c.http, make_prompts(config).caption_instruction.text()));
    } else if (c.kind == "scripted") {
        if (c.script_path.empty()) throw InvalidArgument("caption.script is required for a scripted backend");
        gw.set_caption(std::make_shared<ScriptedCaptionModel>(
            ScriptedCaptionModel::from_json_file(c.script_path)));
    } else if (c.kind != "none") {
        throw InvalidArgument("caption.backend: unsupported value '" + c.kind + "'");
    }
    return gw;
}

std::shared_ptr<const SearchClient> make_search_client(const HmragConfig& config) {
    if (config.web.kind == "serper") return std::make_shared<SerperSearchClient>(config.web.http);
    if (config.web.kind == "stub") {
        if (config.web.stub_fixture_path.empty()) return std::make_shared<StubSearchClient>();
        return std::make_shared<StubSearchClient>(
            StubSearchClient::from_fixture(config.web.stub_fixture_path));
    }
    throw InvalidArgument("web.backend: unsupported value '" + config.web.kind + "'");
}

}  // namespace hmrag
