#pragma once

#include "hmrag/answer.hpp"
#include "hmrag/knowledge.hpp"
#include "hmrag/model_gateway.hpp"

#include <span>
#include <string>
#include <vector>

namespace hmrag {

inline constexpr std::size_t kDefaultTopK = 5;

struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;

    bool operator==(const ScoredChunk&) const = default;
};

struct RetrievalResult {
    std::string query;
    std::vector<ScoredChunk> top;
    std::size_t k = 0;
    std::size_t zero_norm_records = 0;
};

/// Cosine similarity clamped to [-1, 1]; 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Scores every record against the query. Zero-norm records score 0 and
/// are counted in `zero_norm_records` when given.
std::vector<ScoredChunk> score_all(std::span<const double> query_vec, const EmbeddingIndex& index,
                                   std::size_t* zero_norm_records = nullptr);

/// Exact top-k by score, descending, ties broken by ascending chunk_id.
/// k is clamped to the index size.
RetrievalResult rank_top_k(std::string query, std::span<const double> query_vec,
                           const EmbeddingIndex& index, std::size_t k);

/// Fine-grained retrieval over the chunk index followed by an answer
/// generated from the ranked chunks with deterministic decoding.
class VectorRetrievalAgent {
public:
    VectorRetrievalAgent(std::string context_header, std::size_t top_k = kDefaultTopK);

    RetrievalResult retrieve_top_k(const std::string& query, const EmbeddingIndex& index,
                                   const ModelGateway& gateway) const;
    RetrievalResult retrieve_top_k(const std::string& query, const EmbeddingIndex& index,
                                   const ModelGateway& gateway, std::size_t k) const;

    /// Backend failures yield an unavailable candidate.
    AnswerCandidate answer(const std::string& query, const RetrievalResult& result,
                           const ModelGateway& gateway) const;

    /// Query, context header and ranked chunk texts in one prompt. Markup
    /// characters in query and chunks are escaped so distinct inputs
    /// always produce distinct prompts.
    static std::string assemble_prompt(const std::string& query, const std::string& header,
                                       std::span<const std::string> chunk_texts);

    std::size_t top_k() const { return top_k_; }

private:
    std::string header_;
    std::size_t top_k_;
};

}  // namespace hmrag
