#pragma once

#include "hmrag/answer.hpp"
#include "hmrag/config.hpp"
#include "hmrag/decision_agent.hpp"
#include "hmrag/decomposition_agent.hpp"
#include "hmrag/errors.hpp"
#include "hmrag/graph_agent.hpp"
#include "hmrag/ingestion.hpp"
#include "hmrag/knowledge.hpp"
#include "hmrag/model_gateway.hpp"
#include "hmrag/prompts.hpp"
#include "hmrag/vector_agent.hpp"
#include "hmrag/web_agent.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hmrag {

/// The persisted knowledge stores. A store directory holds index.jsonl,
/// graph.jsonl and graph_vectors.jsonl.
struct Stores {
    std::shared_ptr<const EmbeddingIndex> index;
    std::shared_ptr<const KnowledgeGraph> graph;
    std::shared_ptr<const GraphEmbeddings> graph_embeddings;

    void save(const std::string& dir) const;
    /// When graph_vectors.jsonl is missing or stale the vectors are rebuilt
    /// through `gateway` if one is given, otherwise the load fails.
    static Stores load(const std::string& dir, const ModelGateway* gateway = nullptr);
};

struct IngestReport {
    std::size_t records = 0;
    std::size_t captioned = 0;
    std::size_t chunks = 0;
    std::size_t entities = 0;
    std::size_t triplets = 0;
    ExtractionStats extraction;
};

struct IngestResult {
    Stores stores;
    std::vector<FusedDocument> documents;
    IngestReport report;
};

/// Caption fusion, chunking, embedding, graph extraction and graph
/// embedding, in that order.
IngestResult ingest_corpus(std::span<const CorpusRecord> records, const ModelGateway& gateway,
                           const PromptLibrary& prompts, std::size_t chunk_size = kDefaultChunkSize,
                           std::size_t chunk_overlap = kDefaultChunkOverlap);

nlohmann::json to_json(const IngestReport& report);

struct AgentTrace {
    Source source = Source::vector;
    AnswerCandidate candidate;
    std::vector<CallRecord> calls;
    std::vector<std::string> warnings;
    double elapsed_ms = 0.0;
    bool timed_out = false;
};

struct SubQueryTrace {
    std::string sub_query;
    /// The sub-query plus answers to earlier sub-queries, used for answer
    /// generation and arbitration.
    std::string agent_query;
    std::vector<AgentTrace> agents;
    std::optional<ConsensusReport> report;
    std::vector<CallRecord> decision_calls;
    std::string answer;
    double retrieval_ms = 0.0;
    double decision_ms = 0.0;
};

struct QueryTrace {
    std::string question;
    SubQueryPlan plan;
    std::vector<CallRecord> decomposition_calls;
    std::vector<SubQueryTrace> steps;
    std::vector<CallRecord> final_calls;
    std::string final_answer;
    std::vector<std::string> warnings;
    double decomposition_ms = 0.0;
    double final_ms = 0.0;
    double elapsed_ms = 0.0;
};

/// Timing fields are left out unless requested so traces of identical runs
/// compare equal.
nlohmann::json to_json(const QueryTrace& trace, bool include_timing = false);

/// Raised when a query cannot be answered. Carries the partial trace.
class QueryFailed : public Error {
public:
    QueryFailed(const std::string& what, QueryTrace trace)
        : Error(what), trace_(std::move(trace)) {}
    const QueryTrace& trace() const { return trace_; }

private:
    QueryTrace trace_;
};

/// Runs the full question-answering flow: decomposition, concurrent
/// retrieval per sub-query, arbitration and final refinement.
class Pipeline {
public:
    Pipeline(ModelGateway gateway, std::shared_ptr<const SearchClient> search, PromptLibrary prompts,
             PipelineConfig config);

    QueryTrace run_query(const std::string& question, const Stores& stores) const;

    const PipelineConfig& config() const { return config_; }

private:
    SubQueryTrace run_step(const std::string& sub_query, const std::string& agent_query,
                           const Stores& stores, QueryTrace& trace) const;

    ModelGateway gateway_;
    PromptLibrary prompts_;
    PipelineConfig config_;
    std::shared_ptr<const DecompositionAgent> decomposition_;
    std::shared_ptr<const VectorRetrievalAgent> vector_;
    std::shared_ptr<const GraphRetrievalAgent> graph_;
    std::shared_ptr<const WebRetrievalAgent> web_;
    std::shared_ptr<const DecisionAgent> decision_;
};

}  // namespace hmrag
