#include "hmrag/graph_agent.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"
#include "hmrag/vector_agent.hpp"

#include <json.hpp>

#include <fstream>

namespace hmrag {

using nlohmann::json;

namespace {

std::vector<std::string> normalize_keywords(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& k : raw) {
        auto norm = KnowledgeGraph::canonical_name(k);
        if (!norm.empty() && seen.insert(norm).second) out.push_back(std::move(norm));
    }
    return out;
}

double best_score(const std::vector<Vector>& keywords, const Vector& target) {
    double best = -1.0;
    for (const auto& k : keywords) best = std::max(best, cosine_similarity(k, target));
    return best;
}

void add_endpoints(Subgraph& sub) {
    sub.expanded_entities.insert(sub.seed_entities.begin(), sub.seed_entities.end());
    for (const auto& t : sub.triplets) {
        sub.expanded_entities.insert(t.head);
        sub.expanded_entities.insert(t.tail);
    }
}

}  // namespace

KeywordSet parse_keyword_reply(std::string_view reply) {
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw ParseError("keyword reply contains no JSON object", std::string(reply));
    json j;
    try {
        j = json::parse(reply.substr(open, close - open + 1));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("keyword reply is not valid JSON: ") + e.what(),
                         std::string(reply));
    }
    auto read_list = [&](const char* key) {
        std::vector<std::string> out;
        if (!j.is_object() || !j.contains(key)) return out;
        const auto& v = j[key];
        if (!v.is_array()) throw ParseError(std::string(key) + " is not a list", std::string(reply));
        for (const auto& item : v) {
            if (!item.is_string())
                throw ParseError(std::string(key) + " holds a non-string", std::string(reply));
            out.push_back(item.get<std::string>());
        }
        return out;
    };
    KeywordSet ks;
    ks.local = normalize_keywords(read_list("local_keywords"));
    ks.global = normalize_keywords(read_list("global_keywords"));
    if (ks.local.empty() && ks.global.empty())
        throw ParseError("keyword reply holds no keywords", std::string(reply));
    return ks;
}

KeywordSet fallback_keywords(std::string_view query) {
    KeywordSet ks;
    ks.local = content_words(query);
    ks.fallback = true;
    return ks;
}

GraphEmbeddings GraphEmbeddings::build(const KnowledgeGraph& graph, const ModelGateway& gateway) {
    GraphEmbeddings out;
    for (const auto& [name, e] : graph.entities()) out.set_entity(name, gateway.embed_text(name));
    for (const auto& r : graph.relations()) out.set_relation(r, gateway.embed_text(r));
    return out;
}

const Vector& GraphEmbeddings::entity(std::string_view name) const {
    auto it = entities_.find(name);
    if (it == entities_.end())
        throw InvalidArgument("no embedding for entity: " + std::string(name));
    return it->second;
}

const Vector& GraphEmbeddings::relation(std::string_view name) const {
    auto it = relations_.find(name);
    if (it == relations_.end())
        throw InvalidArgument("no embedding for relation: " + std::string(name));
    return it->second;
}

bool GraphEmbeddings::covers(const KnowledgeGraph& graph) const {
    for (const auto& [name, e] : graph.entities())
        if (!entities_.count(name)) return false;
    for (const auto& r : graph.relations())
        if (!relations_.count(r)) return false;
    return true;
}

void GraphEmbeddings::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write file: " + path);
    for (const auto& [name, v] : entities_)
        out << json{{"kind", "entity"}, {"text", name}, {"vector", v}}.dump() << '\n';
    for (const auto& [name, v] : relations_)
        out << json{{"kind", "relation"}, {"text", name}, {"vector", v}}.dump() << '\n';
}

GraphEmbeddings GraphEmbeddings::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open file: " + path);
    GraphEmbeddings out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            auto kind = j.at("kind").get<std::string>();
            auto text = j.at("text").get<std::string>();
            auto v = j.at("vector").get<Vector>();
            if (kind == "entity") out.set_entity(std::move(text), std::move(v));
            else if (kind == "relation") out.set_relation(std::move(text), std::move(v));
            else throw ParseError(path + ":" + std::to_string(lineno) + ": unknown kind", line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(), line);
        }
    }
    return out;
}

Subgraph select_subgraph(const KeywordVectors& keywords, const KnowledgeGraph& graph,
                         const GraphEmbeddings& embeddings, double tau) {
    if (graph.empty()) throw InvalidArgument("knowledge graph is empty");
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0, 1]");
    Subgraph sub;

    // Local phase: entities matched by local keywords and their incident triplets.
    if (!keywords.local.empty()) {
        for (const auto& [name, e] : graph.entities()) {
            if (best_score(keywords.local, embeddings.entity(name)) > tau) {
                sub.seed_entities.insert(name);
                for (const auto& t : graph.incident(name)) sub.triplets.insert(t);
            }
        }
    }

    // Global phase: relation labels matched by global keywords.
    if (!keywords.global.empty()) {
        std::set<std::string> matched;
        for (const auto& r : graph.relations())
            if (best_score(keywords.global, embeddings.relation(r)) > tau) matched.insert(r);
        for (const auto& t : graph.triplets())
            if (matched.count(t.relation)) sub.triplets.insert(t);
    }

    add_endpoints(sub);
    return sub;
}

Subgraph expand_one_hop(const Subgraph& sub, const KnowledgeGraph& graph) {
    Subgraph out = sub;
    std::set<std::string> retrieved = sub.expanded_entities;
    retrieved.insert(sub.seed_entities.begin(), sub.seed_entities.end());
    for (const auto& t : sub.triplets) {
        retrieved.insert(t.head);
        retrieved.insert(t.tail);
    }
    for (const auto& name : retrieved) {
        out.expanded_entities.insert(name);
        for (const auto& n : graph.neighbors(name)) out.expanded_entities.insert(n);
        for (const auto& t : graph.incident(name)) out.triplets.insert(t);
    }
    return out;
}

std::vector<std::string> serialize_subgraph(const Subgraph& sub, const KnowledgeGraph& graph) {
    std::vector<std::string> lines;
    for (const auto& t : sub.triplets) lines.push_back(t.head + " —" + t.relation + "→ " + t.tail);
    for (const auto& name : sub.expanded_entities) {
        const Entity* e = graph.find(name);
        if (!e || (e->description.empty() && !e->visual_location)) continue;
        std::string line = name + ":";
        if (!e->description.empty()) line += " " + e->description;
        if (e->visual_location) line += " (image: " + *e->visual_location + ")";
        lines.push_back(std::move(line));
    }
    return lines;
}

GraphRetrievalAgent::GraphRetrievalAgent(PromptLibrary prompts, double tau)
    : prompts_(std::move(prompts)), tau_(tau) {
    if (!(tau_ >= 0.0 && tau_ <= 1.0)) throw InvalidArgument("tau must lie in [0, 1]");
}

KeywordSet GraphRetrievalAgent::extract_keywords(const std::string& query,
                                                 const ModelGateway& gateway) const {
    if (trim(query).empty()) throw InvalidArgument("query is empty");
    const std::string reply =
        gateway.complete_prompt(prompts_.keyword_extraction.render({{"question", query}}),
                                ModelRole::lightweight_chat);
    try {
        return parse_keyword_reply(reply);
    } catch (const ParseError&) {
        return fallback_keywords(query);
    }
}

Subgraph GraphRetrievalAgent::retrieve_subgraph(const KeywordSet& keywords,
                                                const KnowledgeGraph& graph,
                                                const GraphEmbeddings& embeddings,
                                                const ModelGateway& gateway, double tau) const {
    if (graph.empty()) throw InvalidArgument("knowledge graph is empty");
    KeywordVectors kv;
    for (const auto& k : keywords.local) kv.local.push_back(gateway.embed_text(k));
    for (const auto& k : keywords.global) kv.global.push_back(gateway.embed_text(k));
    return select_subgraph(kv, graph, embeddings, tau);
}

AnswerCandidate GraphRetrievalAgent::answer(const std::string& query, const Subgraph& sub,
                                            const KnowledgeGraph& graph,
                                            const ModelGateway& gateway) const {
    AnswerCandidate c;
    c.source = Source::graph;
    c.evidence = serialize_subgraph(sub, graph);
    const std::string evidence = c.evidence.empty()
                                     ? std::string("(no graph evidence was found for this question)")
                                     : join(c.evidence, "\n");
    try {
        c.text = trim(gateway.complete_prompt(
            prompts_.graph_answer.render({{"question", query}, {"evidence", evidence}}),
            ModelRole::lightweight_chat));
    } catch (const BackendError& e) {
        return AnswerCandidate::unavailable(Source::graph, e.what());
    }
    return c;
}

}  // namespace hmrag
