#pragma once

#include "hmrag/answer.hpp"
#include "hmrag/knowledge.hpp"
#include "hmrag/model_gateway.hpp"
#include "hmrag/prompts.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

inline constexpr double kDefaultTau = 0.3;

/// Entity-level (local) and theme-level (global) keywords of a query,
/// lowercase and deduplicated.
struct KeywordSet {
    std::vector<std::string> local;
    std::vector<std::string> global;
    /// True when the model reply could not be used and the keywords were
    /// derived from the query's content words instead.
    bool fallback = false;

    bool operator==(const KeywordSet&) const = default;
};

/// Parses {"local_keywords": [...], "global_keywords": [...]}, tolerating
/// text around the JSON object. Throws ParseError if unusable.
KeywordSet parse_keyword_reply(std::string_view reply);

/// Content words of the query as local keywords, no global keywords.
KeywordSet fallback_keywords(std::string_view query);

/// Embeddings of every entity name and relation label in a graph.
class GraphEmbeddings {
public:
    static GraphEmbeddings build(const KnowledgeGraph& graph, const ModelGateway& gateway);

    void set_entity(std::string name, Vector v) { entities_[std::move(name)] = std::move(v); }
    void set_relation(std::string name, Vector v) { relations_[std::move(name)] = std::move(v); }

    /// Throws InvalidArgument when the name has no embedding.
    const Vector& entity(std::string_view name) const;
    const Vector& relation(std::string_view name) const;

    bool covers(const KnowledgeGraph& graph) const;

    void save(const std::string& path) const;
    static GraphEmbeddings load(const std::string& path);

    bool operator==(const GraphEmbeddings&) const = default;

private:
    std::map<std::string, Vector, std::less<>> entities_;
    std::map<std::string, Vector, std::less<>> relations_;
};

struct KeywordVectors {
    std::vector<Vector> local;
    std::vector<Vector> global;
};

/// Query-relevant part of the graph. `expanded_entities` always contains
/// the seeds and every endpoint of `triplets`.
struct Subgraph {
    std::set<Triplet> triplets;
    std::set<std::string> seed_entities;
    std::set<std::string> expanded_entities;

    bool empty() const { return triplets.empty() && expanded_entities.empty(); }
    bool operator==(const Subgraph&) const = default;
};

/// Threshold-gated selection. An entity's score is its best cosine against
/// the local keywords, a relation's its best cosine against the global
/// keywords; a triplet is kept when any of its head, tail or relation
/// scores strictly above tau. Entities above tau become seeds (local phase),
/// then relation matches add their triplets (global phase).
Subgraph select_subgraph(const KeywordVectors& keywords, const KnowledgeGraph& graph,
                         const GraphEmbeddings& embeddings, double tau);

/// Adds every graph neighbour of the subgraph's entities and triplet
/// endpoints, plus the triplets connecting them to those nodes.
Subgraph expand_one_hop(const Subgraph& sub, const KnowledgeGraph& graph);

/// "head —relation→ tail" lines followed by entity descriptions and image
/// locations. Empty when the subgraph is empty.
std::vector<std::string> serialize_subgraph(const Subgraph& sub, const KnowledgeGraph& graph);

class GraphRetrievalAgent {
public:
    explicit GraphRetrievalAgent(PromptLibrary prompts, double tau = kDefaultTau);

    KeywordSet extract_keywords(const std::string& query, const ModelGateway& gateway) const;

    Subgraph retrieve_subgraph(const KeywordSet& keywords, const KnowledgeGraph& graph,
                               const GraphEmbeddings& embeddings, const ModelGateway& gateway,
                               double tau) const;
    Subgraph retrieve_subgraph(const KeywordSet& keywords, const KnowledgeGraph& graph,
                               const GraphEmbeddings& embeddings,
                               const ModelGateway& gateway) const {
        return retrieve_subgraph(keywords, graph, embeddings, gateway, tau_);
    }

    AnswerCandidate answer(const std::string& query, const Subgraph& sub,
                           const KnowledgeGraph& graph, const ModelGateway& gateway) const;

    double tau() const { return tau_; }

private:
    PromptLibrary prompts_;
    double tau_;
};

}  // namespace hmrag
