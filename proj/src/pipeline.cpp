#include "hmrag/pipeline.hpp"

#include "hmrag/text.hpp"

#include <chrono>
#include <filesystem>
#include <future>
#include <thread>

namespace hmrag {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr const char* kIndexFile = "index.jsonl";
constexpr const char* kGraphFile = "graph.jsonl";
constexpr const char* kGraphVectorsFile = "graph_vectors.jsonl";

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

json to_json(const CallRecord& r) {
    return {{"role", std::string(to_string(r.role))},
            {"request", r.request},
            {"response", r.response},
            {"ok", r.ok}};
}

json to_json(std::span<const CallRecord> calls) {
    json out = json::array();
    for (const auto& c : calls) out.push_back(to_json(c));
    return out;
}

json to_json(const AnswerCandidate& c) {
    json j = {{"source", std::string(to_string(c.source))},
              {"available", c.available},
              {"text", c.text},
              {"evidence", c.evidence}};
    j["summary"] = c.summary ? json(*c.summary) : json(nullptr);
    if (!c.available) j["failure"] = c.failure;
    return j;
}

json to_json(const ConsensusReport& r) {
    json pairs = json::array();
    for (const auto& p : r.pair_scores) {
        pairs.push_back({{"first", std::string(to_string(p.first))},
                         {"second", std::string(to_string(p.second))},
                         {"rouge_l", p.score.rouge_l},
                         {"bleu", p.score.bleu},
                         {"fused", p.score.fused}});
    }
    return {{"pair_scores", pairs},
            {"mean_fused", r.mean_fused},
            {"threshold", r.threshold},
            {"consensus", r.consensus},
            {"route", std::string(to_string(r.route))}};
}

// Everything an agent run needs, held by value so a timed-out run can keep
// going on its own thread after the orchestrator has moved on.
struct AgentJob {
    Source source;
    std::string sub_query;
    std::string agent_query;
    ModelGateway gateway;
    Stores stores;
    std::shared_ptr<const VectorRetrievalAgent> vector;
    std::shared_ptr<const GraphRetrievalAgent> graph;
    std::shared_ptr<const WebRetrievalAgent> web;
};

struct AgentOutcome {
    AnswerCandidate candidate;
    std::vector<std::string> warnings;
};

AgentOutcome run_agent(const AgentJob& job) {
    AgentOutcome out;
    const auto& gw = job.gateway;
    switch (job.source) {
    case Source::vector: {
        if (!job.stores.index) throw InvalidArgument("no embedding index loaded");
        auto result = job.vector->retrieve_top_k(job.sub_query, *job.stores.index, gw);
        if (result.zero_norm_records > 0)
            out.warnings.push_back(std::to_string(result.zero_norm_records) +
                                   " index record(s) have a zero-norm vector");
        out.candidate = job.vector->answer(job.agent_query, result, gw);
        break;
    }
    case Source::graph: {
        if (!job.stores.graph || !job.stores.graph_embeddings)
            throw InvalidArgument("no knowledge graph loaded");
        auto keywords = job.graph->extract_keywords(job.sub_query, gw);
        if (keywords.fallback)
            out.warnings.push_back("keyword reply unusable; fell back to query content words");
        auto sub = job.graph->retrieve_subgraph(keywords, *job.stores.graph,
                                                *job.stores.graph_embeddings, gw);
        auto expanded = expand_one_hop(sub, *job.stores.graph);
        out.candidate = job.graph->answer(job.agent_query, expanded, *job.stores.graph, gw);
        break;
    }
    case Source::web: {
        auto results = job.web->search(job.sub_query, gw.log().get());
        out.candidate = job.web->answer(job.agent_query, results, gw);
        break;
    }
    }
    if (out.candidate.available && trim(out.candidate.text).empty())
        out.candidate = AnswerCandidate::unavailable(job.source, "agent produced an empty answer");
    return out;
}

std::string contextualize(const std::string& sub_query, const std::vector<SubQueryTrace>& earlier) {
    if (earlier.empty()) return sub_query;
    std::string out = sub_query + "\n\nAnswers to earlier sub-questions:";
    for (const auto& s : earlier) out += "\n- " + s.sub_query + " -> " + s.answer;
    return out;
}

}  // namespace

void Stores::save(const std::string& dir) const {
    if (!index || !graph || !graph_embeddings) throw InvalidArgument("stores are incomplete");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidArgument("cannot create store directory " + dir + ": " + ec.message());
    save_index(*index, (fs::path(dir) / kIndexFile).string());
    save_graph(*graph, (fs::path(dir) / kGraphFile).string());
    graph_embeddings->save((fs::path(dir) / kGraphVectorsFile).string());
}

Stores Stores::load(const std::string& dir, const ModelGateway* gateway) {
    Stores s;
    s.index = std::make_shared<const EmbeddingIndex>(load_index((fs::path(dir) / kIndexFile).string()));
    auto graph = std::make_shared<const KnowledgeGraph>(load_graph((fs::path(dir) / kGraphFile).string()));
    s.graph = graph;
    const auto vec_path = fs::path(dir) / kGraphVectorsFile;
    std::optional<GraphEmbeddings> vectors;
    if (fs::exists(vec_path)) vectors = GraphEmbeddings::load(vec_path.string());
    if (!vectors || !vectors->covers(*graph)) {
        if (!gateway)
            throw InvalidArgument("graph vectors in " + dir + " are missing or incomplete");
        vectors = GraphEmbeddings::build(*graph, *gateway);
    }
    s.graph_embeddings = std::make_shared<const GraphEmbeddings>(std::move(*vectors));
    return s;
}

IngestResult ingest_corpus(std::span<const CorpusRecord> records, const ModelGateway& gateway,
                           const PromptLibrary& prompts, std::size_t chunk_size,
                           std::size_t chunk_overlap) {
    if (chunk_size == 0 || chunk_overlap >= chunk_size)
        throw InvalidArgument("chunk overlap must be smaller than a positive chunk size");
    IngestResult out;
    out.report.records = records.size();
    for (const auto& r : records) {
        r.validate();
        out.documents.push_back(caption_and_refine(r, gateway, prompts));
        if (r.image_ref) ++out.report.captioned;
    }

    std::vector<Chunk> chunks;
    for (const auto& d : out.documents) {
        auto c = chunk_document(d, chunk_size, chunk_overlap);
        chunks.insert(chunks.end(), std::make_move_iterator(c.begin()),
                      std::make_move_iterator(c.end()));
    }
    out.report.chunks = chunks.size();
    auto index = std::make_shared<const EmbeddingIndex>(build_index(chunks, gateway));

    auto extraction = extract_graph(out.documents, gateway, prompts);
    out.report.extraction = extraction.stats;
    out.report.entities = extraction.graph.entities().size();
    out.report.triplets = extraction.graph.triplets().size();
    auto graph = std::make_shared<const KnowledgeGraph>(std::move(extraction.graph));
    auto vectors = std::make_shared<const GraphEmbeddings>(GraphEmbeddings::build(*graph, gateway));

    out.stores = {index, graph, vectors};
    return out;
}

json to_json(const IngestReport& r) {
    return {{"records", r.records},
            {"captioned", r.captioned},
            {"chunks", r.chunks},
            {"entities", r.entities},
            {"triplets", r.triplets},
            {"extraction",
             {{"documents", r.extraction.documents},
              {"skipped_documents", r.extraction.skipped_documents},
              {"malformed_lines", r.extraction.malformed_lines},
              {"auto_created_entities", r.extraction.auto_created_entities}}}};
}

json to_json(const QueryTrace& t, bool include_timing) {
    json steps = json::array();
    for (const auto& s : t.steps) {
        json agents = json::array();
        for (const auto& a : s.agents) {
            json aj = {{"source", std::string(to_string(a.source))},
                       {"candidate", to_json(a.candidate)},
                       {"calls", to_json(a.calls)},
                       {"warnings", a.warnings},
                       {"timed_out", a.timed_out}};
            if (include_timing) aj["elapsed_ms"] = a.elapsed_ms;
            agents.push_back(std::move(aj));
        }
        json sj = {{"sub_query", s.sub_query},
                   {"agent_query", s.agent_query},
                   {"agents", std::move(agents)},
                   {"decision_calls", to_json(s.decision_calls)},
                   {"answer", s.answer}};
        sj["consensus"] = s.report ? to_json(*s.report) : json(nullptr);
        if (include_timing) {
            sj["retrieval_ms"] = s.retrieval_ms;
            sj["decision_ms"] = s.decision_ms;
        }
        steps.push_back(std::move(sj));
    }
    json j = {{"question", t.question},
              {"plan",
               {{"multi_intent", t.plan.multi_intent},
                {"sub_queries", t.plan.sub_queries},
                {"warnings", t.plan.warnings}}},
              {"decomposition_calls", to_json(t.decomposition_calls)},
              {"steps", std::move(steps)},
              {"final_calls", to_json(t.final_calls)},
              {"final_answer", t.final_answer},
              {"warnings", t.warnings}};
    if (include_timing) {
        j["decomposition_ms"] = t.decomposition_ms;
        j["final_ms"] = t.final_ms;
        j["elapsed_ms"] = t.elapsed_ms;
    }
    return j;
}

Pipeline::Pipeline(ModelGateway gateway, std::shared_ptr<const SearchClient> search,
                   PromptLibrary prompts, PipelineConfig config)
    : gateway_(std::move(gateway)), prompts_(std::move(prompts)), config_(std::move(config)) {
    config_.validate();
    if (config_.enabled_agents.count(Source::web) && !search)
        throw InvalidArgument("the web agent is enabled but no search client was given");
    decomposition_ = std::make_shared<const DecompositionAgent>(prompts_);
    vector_ = std::make_shared<const VectorRetrievalAgent>(prompts_.vector_context_header.text(),
                                                           config_.top_k);
    graph_ = std::make_shared<const GraphRetrievalAgent>(prompts_, config_.tau);
    if (search) web_ = std::make_shared<const WebRetrievalAgent>(search, config_.search, prompts_);
    decision_ = std::make_shared<const DecisionAgent>(prompts_, config_.decision);
}

SubQueryTrace Pipeline::run_step(const std::string& sub_query, const std::string& agent_query,
                                 const Stores& stores, QueryTrace& trace) const {
    SubQueryTrace step;
    step.sub_query = sub_query;
    step.agent_query = agent_query;

    struct Running {
        Source source;
        std::shared_ptr<CallLog> log;
        std::future<AgentOutcome> future;
        Clock::time_point start;
    };
    const auto step_start = Clock::now();
    std::vector<Running> running;
    for (Source s : config_.enabled_agents) {
        auto log = std::make_shared<CallLog>();
        AgentJob job{s, sub_query, agent_query, gateway_.with_log(log), stores, vector_, graph_, web_};
        std::packaged_task<AgentOutcome()> task([job = std::move(job)] { return run_agent(job); });
        auto fut = task.get_future();
        std::thread(std::move(task)).detach();
        running.push_back({s, log, std::move(fut), Clock::now()});
    }

    const auto deadline =
        Clock::now() + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(config_.agent_timeout_s));
    for (auto& r : running) {
        AgentTrace at;
        at.source = r.source;
        if (r.future.wait_until(deadline) != std::future_status::ready) {
            at.timed_out = true;
            at.candidate = AnswerCandidate::unavailable(r.source, "agent timed out");
        } else {
            try {
                auto outcome = r.future.get();
                at.candidate = std::move(outcome.candidate);
                at.warnings = std::move(outcome.warnings);
            } catch (const ScriptMiss&) {
                throw;
            } catch (const std::exception& e) {
                at.candidate = AnswerCandidate::unavailable(r.source, e.what());
            }
        }
        at.elapsed_ms = ms_since(r.start);
        at.calls = r.log->snapshot();
        if (!at.candidate.available)
            trace.warnings.push_back(std::string(to_string(r.source)) +
                                     " agent unavailable: " + at.candidate.failure);
        step.agents.push_back(std::move(at));
    }

    step.retrieval_ms = ms_since(step_start);

    std::size_t available = 0;
    for (const auto& a : step.agents) available += a.candidate.available ? 1 : 0;
    if (available == 0) {
        trace.steps.push_back(step);
        throw QueryFailed("every retrieval agent failed for sub-query: " + sub_query, trace);
    }

    const auto decision_start = Clock::now();
    if (config_.decision_enabled) {
        auto log = std::make_shared<CallLog>();
        const auto gw = gateway_.with_log(log);
        std::vector<AnswerCandidate> candidates;
        for (auto& a : step.agents) {
            if (a.candidate.available) {
                a.candidate = decision_->summarize(a.candidate, gw);
                if (!a.candidate.available)
                    trace.warnings.push_back(std::string(to_string(a.source)) +
                                             " summary failed: " + a.candidate.failure);
            }
            candidates.push_back(a.candidate);
        }
        try {
            auto decision = decision_->decide(agent_query, candidates, gw);
            step.report = decision.report;
            step.answer = std::move(decision.answer);
        } catch (const ScriptMiss&) {
            throw;
        } catch (const Error& e) {
            step.decision_calls = log->snapshot();
            trace.steps.push_back(step);
            throw QueryFailed(std::string("decision failed: ") + e.what(), trace);
        }
        step.decision_calls = log->snapshot();
    } else {
        // Without arbitration the web answer is preferred, then vector, then graph.
        for (Source s : {Source::web, Source::vector, Source::graph}) {
            for (const auto& a : step.agents) {
                if (a.source == s && a.candidate.available) {
                    step.answer = a.candidate.text;
                    break;
                }
            }
            if (!step.answer.empty()) break;
        }
    }
    step.decision_ms = ms_since(decision_start);
    return step;
}

QueryTrace Pipeline::run_query(const std::string& question, const Stores& stores) const {
    if (trim(question).empty()) throw InvalidArgument("question is empty");
    const auto start = Clock::now();
    QueryTrace trace;
    trace.question = question;

    auto decomposition_log = std::make_shared<CallLog>();
    try {
        trace.plan = decomposition_->decompose(question, gateway_.with_log(decomposition_log));
    } catch (const BackendError& e) {
        trace.decomposition_calls = decomposition_log->snapshot();
        throw QueryFailed(std::string("decomposition failed: ") + e.what(), trace);
    }
    trace.decomposition_calls = decomposition_log->snapshot();
    trace.decomposition_ms = ms_since(start);
    trace.warnings = trace.plan.warnings;

    for (const auto& sub : trace.plan.sub_queries) {
        auto step = run_step(sub, contextualize(sub, trace.steps), stores, trace);
        trace.steps.push_back(std::move(step));
    }

    const auto final_start = Clock::now();
    if (trace.plan.multi_intent && trace.steps.size() > 1) {
        std::string steps;
        for (std::size_t i = 0; i < trace.steps.size(); ++i) {
            steps += (i ? "\n" : "") + std::to_string(i + 1) + ". " + trace.steps[i].sub_query +
                     "\n   " + trace.steps[i].answer;
        }
        auto log = std::make_shared<CallLog>();
        try {
            trace.final_answer = trim(gateway_.with_log(log).complete_prompt(
                prompts_.final_refine.render({{"question", question}, {"steps", steps}}),
                ModelRole::lightweight_chat));
        } catch (const BackendError& e) {
            trace.final_calls = log->snapshot();
            throw QueryFailed(std::string("final refinement failed: ") + e.what(), trace);
        }
        trace.final_calls = log->snapshot();
    } else {
        trace.final_answer = trace.steps.back().answer;
    }
    if (trim(trace.final_answer).empty()) throw QueryFailed("the final answer is empty", trace);
    trace.final_ms = ms_since(final_start);
    trace.elapsed_ms = ms_since(start);
    return trace;
}

}  // namespace hmrag
