#include "hmrag/vector_agent.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <algorithm>
#include <cmath>

namespace hmrag {

namespace {

bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chunk.chunk_id < b.chunk.chunk_id;
}

std::string escape_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else out += c;
    }
    return out;
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("cosine of vectors with different sizes");
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

std::vector<ScoredChunk> score_all(std::span<const double> query_vec, const EmbeddingIndex& index,
                                   std::size_t* zero_norm_records) {
    if (query_vec.size() != index.dim())
        throw DimensionMismatch("query has dimension " + std::to_string(query_vec.size()) +
                                ", index has " + std::to_string(index.dim()));
    if (norm(query_vec) == 0.0) throw InvalidArgument("query vector has zero norm");
    std::vector<ScoredChunk> out;
    out.reserve(index.size());
    std::size_t zeros = 0;
    for (const auto& r : index.records()) {
        if (norm(r.vector) == 0.0) ++zeros;
        out.push_back({r.chunk, cosine_similarity(query_vec, r.vector)});
    }
    if (zero_norm_records) *zero_norm_records = zeros;
    return out;
}

RetrievalResult rank_top_k(std::string query, std::span<const double> query_vec,
                           const EmbeddingIndex& index, std::size_t k) {
    if (k == 0) throw InvalidArgument("k must be at least 1");
    if (index.empty()) throw InvalidArgument("index is empty");
    RetrievalResult result;
    result.query = std::move(query);
    result.k = k;
    auto scored = score_all(query_vec, index, &result.zero_norm_records);
    const auto n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                      ranks_before);
    scored.resize(n);
    result.top = std::move(scored);
    return result;
}

VectorRetrievalAgent::VectorRetrievalAgent(std::string context_header, std::size_t top_k)
    : header_(std::move(context_header)), top_k_(top_k) {
    if (top_k_ == 0) throw InvalidArgument("top_k must be at least 1");
}

RetrievalResult VectorRetrievalAgent::retrieve_top_k(const std::string& query,
                                                     const EmbeddingIndex& index,
                                                     const ModelGateway& gateway) const {
    return retrieve_top_k(query, index, gateway, top_k_);
}

RetrievalResult VectorRetrievalAgent::retrieve_top_k(const std::string& query,
                                                     const EmbeddingIndex& index,
                                                     const ModelGateway& gateway,
                                                     std::size_t k) const {
    if (index.empty()) throw InvalidArgument("index is empty");
    const Vector q = gateway.embed_text(query);
    return rank_top_k(query, q, index, k);
}

std::string VectorRetrievalAgent::assemble_prompt(const std::string& query,
                                                  const std::string& header,
                                                  std::span<const std::string> chunk_texts) {
    std::string prompt = "Question: " + escape_markup(query) + "\n\n" + header + "\n";
    for (std::size_t i = 0; i < chunk_texts.size(); ++i) {
        const auto id = std::to_string(i + 1);
        prompt += "\n<context id=\"" + id + "\">\n" + escape_markup(chunk_texts[i]) +
                  "\n</context>\n";
    }
    return prompt;
}

AnswerCandidate VectorRetrievalAgent::answer(const std::string& query,
                                             const RetrievalResult& result,
                                             const ModelGateway& gateway) const {
    if (result.top.empty()) throw InvalidArgument("vector answer needs at least one chunk");
    std::vector<std::string> texts;
    texts.reserve(result.top.size());
    for (const auto& sc : result.top) texts.push_back(sc.chunk.text);

    AnswerCandidate c;
    c.source = Source::vector;
    c.evidence = texts;
    try {
        c.text = trim(gateway.complete_prompt(assemble_prompt(query, header_, texts)));
    } catch (const BackendError& e) {
        return AnswerCandidate::unavailable(Source::vector, e.what());
    }
    return c;
}

}  // namespace hmrag
