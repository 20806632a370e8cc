#pragma once

#include "hmrag/model_gateway.hpp"

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

/// One corpus entry: text, an image, or both.
struct CorpusRecord {
    std::string id;
    std::string text;
    std::optional<std::string> image_ref;

    void validate() const;
};

/// Corpus text after the image caption has been folded in.
struct FusedDocument {
    std::string id;
    std::string fused_text;
    std::optional<std::string> caption;
    std::optional<std::string> image_ref;

    bool operator==(const FusedDocument&) const = default;
};

/// Half-open whitespace-token range [start, end).
struct TokenSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    auto operator<=>(const TokenSpan&) const = default;
};

struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::string text;
    TokenSpan span;

    bool operator==(const Chunk&) const = default;
};

struct IndexRecord {
    Chunk chunk;
    Vector vector;

    bool operator==(const IndexRecord&) const = default;
};

/// Immutable list of embedded chunks searched exhaustively.
class EmbeddingIndex {
public:
    EmbeddingIndex() = default;
    /// Throws InvalidArgument on duplicate chunk ids and DimensionMismatch
    /// when a vector's length differs from `dim`.
    EmbeddingIndex(std::size_t dim, std::vector<IndexRecord> records);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::vector<IndexRecord>& records() const { return records_; }

    bool operator==(const EmbeddingIndex&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<IndexRecord> records_;
};

struct Entity {
    std::string name;
    std::string description;
    std::optional<std::string> visual_location;

    bool operator==(const Entity&) const = default;
};

struct Triplet {
    std::string head;
    std::string relation;
    std::string tail;

    auto operator<=>(const Triplet&) const = default;
};

/// Entities keyed by case-folded name plus deduplicated (head, relation,
/// tail) triplets whose endpoints are always present.
class KnowledgeGraph {
public:
    /// Trimmed, case-folded, inner whitespace collapsed.
    static std::string canonical_name(std::string_view name);

    /// Inserts or merges. An existing entity keeps its description and
    /// location unless they are empty. Returns the stored entity.
    const Entity& add_entity(Entity entity);

    /// Endpoints must already exist. Returns false for a duplicate.
    bool add_triplet(const Triplet& triplet);

    bool contains(std::string_view name) const;
    const Entity* find(std::string_view name) const;

    const std::map<std::string, Entity, std::less<>>& entities() const { return entities_; }
    const std::set<Triplet>& triplets() const { return triplets_; }

    /// Undirected adjacency, self loops excluded.
    const std::set<std::string>& neighbors(std::string_view name) const;
    /// Triplets having `name` as head or tail.
    const std::vector<Triplet>& incident(std::string_view name) const;

    std::set<std::string> relations() const;

    bool empty() const { return entities_.empty(); }

    bool operator==(const KnowledgeGraph& other) const {
        return entities_ == other.entities_ && triplets_ == other.triplets_;
    }

private:
    std::map<std::string, Entity, std::less<>> entities_;
    std::set<Triplet> triplets_;
    std::map<std::string, std::set<std::string>, std::less<>> adjacency_;
    std::map<std::string, std::vector<Triplet>, std::less<>> incident_;
};

// JSON-lines persistence. Index: header {dim, count}, then one
// {chunk_id, vector, text, doc_id, span} per line. Graph: {kind:"entity", ...}
// and {kind:"triplet", ...} lines.
std::vector<CorpusRecord> load_corpus(const std::string& path);
void save_index(const EmbeddingIndex& index, const std::string& path);
EmbeddingIndex load_index(const std::string& path);
void save_graph(const KnowledgeGraph& graph, const std::string& path);
KnowledgeGraph load_graph(const std::string& path);

}  // namespace hmrag
