// Acceptance checks. Each criterion prints one [PASS]/[FAIL] line with its
// measured runtime; `--criterion NAME` runs a single one.

#include "oracles.hpp"
#include "world.hpp"

#include "hmrag/decision_agent.hpp"
#include "hmrag/evaluation.hpp"
#include "hmrag/graph_agent.hpp"
#include "hmrag/metrics.hpp"
#include "hmrag/pipeline.hpp"
#include "hmrag/scripted_backends.hpp"
#include "hmrag/text.hpp"
#include "hmrag/vector_agent.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

namespace {

using hmrag::Source;

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Collects the first few failures of a criterion.
class Check {
public:
    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ++failures_;
        if (failures_ <= 5) messages_ << (failures_ > 1 ? "; " : "") << what;
    }
    Outcome outcome(const std::string& summary) const {
        if (failures_ == 0) return {true, summary};
        return {false, std::to_string(failures_) + " failure(s): " + messages_.str()};
    }

private:
    std::size_t failures_ = 0;
    std::ostringstream messages_;
};

std::string str(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

Outcome metric_oracles() {
    Check c;
    std::mt19937_64 rng(20240101);
    for (int i = 0; i < 200; ++i) {
        auto a = oracle::random_tokens(rng, 1, 12, 5);
        auto b = oracle::random_tokens(rng, 1, 12, 5);
        const double got = hmrag::rouge_l(a, b).value;
        const double want = oracle::rouge_l(a, b);
        c.expect(std::abs(got - want) <= 1e-9, "rouge_l pair " + std::to_string(i) + ": " + str(got) +
                                                   " vs oracle " + str(want));
    }
    for (int i = 0; i < 200; ++i) {
        auto a = oracle::random_tokens(rng, 1, 12, 5);
        auto b = oracle::random_tokens(rng, 1, 12, 5);
        const double got = hmrag::bleu(a, b, 4).value;
        const double want = oracle::bleu_uniform(a, b, 4);
        c.expect(std::abs(got - want) <= 1e-9, "bleu pair " + std::to_string(i) + ": " + str(got) +
                                                   " vs oracle " + str(want));
    }
    using T = std::vector<std::string>;
    c.expect(hmrag::rouge_l(T{"a", "b", "c", "d"}, T{"a", "c", "b", "d"}).value == 0.75,
             "rouge_l [a,b,c,d]/[a,c,b,d] != 0.75");
    T five{"a", "b", "c", "d", "e"};
    c.expect(hmrag::bleu(five, five, 4).value == 1.0, "bleu identical 5-token != 1");
    c.expect(hmrag::bleu(T{"a", "b", "c", "d"}, T{"a", "b", "c", "e"}, 4).value == 0.0,
             "bleu [a,b,c,d]/[a,b,c,e] != 0");
    c.expect(hmrag::bleu(T{"a", "b"}, T{"a", "b", "c"}, 4).value == 1.0, "bleu [a,b]/[a,b,c] != 1");
    return c.outcome("400 random pairs and 4 fixed cases agree with the oracles");
}

Outcome retrieval_exactness() {
    Check c;
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> n_dist(1, 1000), dim_dist(1, 64), k_dist(1, 20);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_int_distribution<int> small(-2, 2);
    std::bernoulli_distribution coarse(0.3), dup(0.1);
    std::size_t tie_instances = 0;
    for (int inst = 0; inst < 500; ++inst) {
        const auto n = n_dist(rng);
        const auto dim = dim_dist(rng);
        // Coarse integer coordinates make score ties common.
        const bool use_coarse = coarse(rng);
        auto draw = [&] {
            hmrag::Vector v(dim);
            for (auto& x : v) x = use_coarse ? small(rng) : coord(rng);
            return v;
        };
        std::vector<hmrag::IndexRecord> recs;
        for (std::size_t i = 0; i < n; ++i) {
            hmrag::IndexRecord r;
            char id[16];
            std::snprintf(id, sizeof id, "c%05zu", (i * 7919) % 100000);
            r.chunk.chunk_id = id;
            r.chunk.text = id;
            r.vector = (i > 0 && dup(rng)) ? recs[i - 1].vector : draw();
            recs.push_back(std::move(r));
        }
        // Shuffle so storage order differs from id order.
        std::shuffle(recs.begin(), recs.end(), rng);
        hmrag::EmbeddingIndex index(dim, std::move(recs));
        hmrag::Vector q = draw();
        if (std::all_of(q.begin(), q.end(), [](double x) { return x == 0.0; })) q[0] = 1.0;
        const auto k = k_dist(rng);
        const auto got = hmrag::rank_top_k("q", q, index, k);
        const auto want = oracle::top_k(q, index, k);
        bool same = got.top.size() == want.size();
        for (std::size_t i = 0; same && i < want.size(); ++i)
            same = got.top[i].chunk.chunk_id == want[i].id && got.top[i].score == want[i].score;
        for (std::size_t i = 1; i < want.size(); ++i)
            if (want[i].score == want[i - 1].score) {
                ++tie_instances;
                break;
            }
        c.expect(same, "instance " + std::to_string(inst) + " differs from the oracle");
    }
    c.expect(tie_instances > 0, "no instance exercised the tie-break");
    for (int i = 0; i < 100; ++i) {
        hmrag::Vector v(1 + i % 64);
        for (auto& x : v) x = coord(rng);
        const double s = hmrag::cosine_similarity(v, v);
        c.expect(std::abs(s - 1.0) <= 1e-9, "self-similarity " + str(s));
    }
    return c.outcome("500 instances match the exhaustive-sort oracle (" + std::to_string(tie_instances) +
                     " with tied scores in the top-k); self-similarity within 1e-9");
}

Outcome graph_properties() {
    Check c;
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<std::size_t> nodes_dist(1, 30), pick(0, 1000);
    for (int g = 0; g < 200; ++g) {
        const auto nodes = nodes_dist(rng);
        const auto graph = oracle::random_graph(rng, nodes, pick(rng) % (2 * nodes + 1), 4);
        hmrag::Subgraph sub;
        for (const auto& [name, e] : graph.entities())
            if (pick(rng) % 5 == 0) sub.seed_entities.insert(name);
        for (const auto& t : graph.triplets())
            if (pick(rng) % 6 == 0) sub.triplets.insert(t);
        sub.expanded_entities = sub.seed_entities;
        for (const auto& t : sub.triplets) {
            sub.expanded_entities.insert(t.head);
            sub.expanded_entities.insert(t.tail);
        }
        const auto got = hmrag::expand_one_hop(sub, graph);
        const auto want = oracle::expand(sub.seed_entities, sub.expanded_entities, sub.triplets, graph);
        c.expect(got.expanded_entities == want.entities, "graph " + std::to_string(g) + ": entity set differs");
        c.expect(got.triplets == want.triplets, "graph " + std::to_string(g) + ": triplet set differs");
        c.expect(got.seed_entities == sub.seed_entities, "graph " + std::to_string(g) + ": seeds changed");
    }

    const double taus[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::size_t shrinking = 0;  // fixtures whose selection strictly shrinks somewhere
    for (int f = 0; f < 50; ++f) {
        const auto graph = oracle::random_graph(rng, 5 + pick(rng) % 20, 10 + pick(rng) % 30, 5);
        // Random embeddings with a few keyword vectors copied from graph
        // items so that high thresholds still select something.
        std::normal_distribution<double> normal;
        auto draw = [&] {
            hmrag::Vector v(16);
            for (auto& x : v) x = normal(rng);
            return v;
        };
        hmrag::GraphEmbeddings emb;
        std::vector<hmrag::Vector> entity_vecs, relation_vecs;
        for (const auto& [name, e] : graph.entities()) {
            entity_vecs.push_back(draw());
            emb.set_entity(name, entity_vecs.back());
        }
        for (const auto& r : graph.relations()) {
            relation_vecs.push_back(draw());
            emb.set_relation(r, relation_vecs.back());
        }
        hmrag::KeywordVectors kv;
        for (int i = 0; i < 2; ++i) kv.local.push_back(draw());
        kv.local.push_back(entity_vecs[pick(rng) % entity_vecs.size()]);
        kv.global.push_back(draw());
        if (!relation_vecs.empty()) kv.global.push_back(relation_vecs[pick(rng) % relation_vecs.size()]);

        std::vector<hmrag::Subgraph> subs;
        for (double tau : taus) subs.push_back(hmrag::select_subgraph(kv, graph, emb, tau));
        for (std::size_t i = 0; i + 1 < subs.size(); ++i) {
            bool subset = std::includes(subs[i].triplets.begin(), subs[i].triplets.end(),
                                        subs[i + 1].triplets.begin(), subs[i + 1].triplets.end());
            c.expect(subset, "fixture " + std::to_string(f) + ": tau " + str(taus[i + 1]) +
                                 " selected a triplet that tau " + str(taus[i]) + " did not");
        }
        for (std::size_t i = 0; i + 1 < subs.size(); ++i)
            if (subs[i + 1].triplets.size() < subs[i].triplets.size() && !subs[i + 1].triplets.empty()) {
                ++shrinking;
                break;
            }
        for (const auto& s : subs)
            for (const auto& t : s.triplets)
                c.expect(graph.triplets().count(t) == 1, "selected triplet not in graph");
    }
    c.expect(shrinking >= 10, "only " + std::to_string(shrinking) + " fixtures had a non-trivial nested selection");
    return c.outcome("expand_one_hop matches the adjacency oracle on 200 graphs; selection monotone in tau on 50 fixtures (" +
                     std::to_string(shrinking) + " with a strictly smaller non-empty selection at a higher tau)");
}

hmrag::AnswerCandidate summarized(Source s, const std::string& summary) {
    hmrag::AnswerCandidate a;
    a.source = s;
    a.text = summary;
    a.summary = summary;
    return a;
}

Outcome decision_routing() {
    Check c;
    hmrag::DecisionConfig cfg;
    {
        std::vector<hmrag::AnswerCandidate> same = {summarized(Source::vector, "granite is igneous"),
                                                    summarized(Source::graph, "granite is igneous"),
                                                    summarized(Source::web, "granite is igneous")};
        auto r = hmrag::vote(same, cfg);
        c.expect(r.route == hmrag::Route::lightweight && r.mean_fused == 1.0, "identical candidates did not route lightweight");
    }
    {
        std::vector<hmrag::AnswerCandidate> disjoint = {summarized(Source::vector, "alpha beta"),
                                                        summarized(Source::graph, "gamma delta"),
                                                        summarized(Source::web, "epsilon zeta")};
        auto r = hmrag::vote(disjoint, cfg);
        c.expect(r.route == hmrag::Route::expert && r.mean_fused == 0.0, "disjoint candidates did not route expert");
    }
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> count(1, 3);
    const Source sources[] = {Source::vector, Source::graph, Source::web};
    std::size_t lightweight = 0, expert = 0;
    for (int f = 0; f < 100; ++f) {
        hmrag::DecisionConfig rc;
        rc.fusion_lambda = unit(rng);
        rc.consensus_threshold = unit(rng);
        std::vector<hmrag::AnswerCandidate> cands;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            auto toks = oracle::random_tokens(rng, 1, 8, 4);
            std::string s;
            for (const auto& t : toks) s += t + " ";
            cands.push_back(summarized(sources[i], s));
        }
        const auto r = hmrag::vote(cands, rc);
        // Recompute the mean from the oracles.
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < cands.size(); ++i)
            for (std::size_t j = i + 1; j < cands.size(); ++j) {
                const auto a = hmrag::metric_tokens(*cands[i].summary);
                const auto b = hmrag::metric_tokens(*cands[j].summary);
                const double sym = (oracle::bleu_uniform(a, b, 4) + oracle::bleu_uniform(b, a, 4)) / 2.0;
                sum += rc.fusion_lambda * oracle::rouge_l(a, b) + (1.0 - rc.fusion_lambda) * sym;
                ++pairs;
            }
        const double mean = pairs ? sum / static_cast<double>(pairs) : 1.0;
        c.expect(std::abs(mean - r.mean_fused) <= 1e-9, "fixture " + std::to_string(f) + ": mean " +
                                                            str(r.mean_fused) + " vs oracle " + str(mean));
        const bool light = r.route == hmrag::Route::lightweight;
        c.expect(light == (r.mean_fused >= rc.consensus_threshold), "fixture " + std::to_string(f) + ": route disagrees with threshold");
        c.expect(r.consensus == light, "consensus flag disagrees with route");
        (light ? lightweight : expert)++;
    }
    c.expect(lightweight > 0 && expert > 0, "random fixtures never exercised both routes");
    return c.outcome("identical -> lightweight, disjoint -> expert, route <=> mean >= threshold on 100 fixtures (" +
                     std::to_string(lightweight) + " lightweight, " + std::to_string(expert) + " expert)");
}

hmrag::PipelineConfig config_for(std::set<Source> agents, bool decision) {
    hmrag::PipelineConfig cfg;
    cfg.enabled_agents = std::move(agents);
    cfg.decision_enabled = decision;
    return cfg;
}

Outcome end_to_end_determinism() {
    Check c;
    auto w = world::make_world();
    const auto ingested = world::ingest(w);
    hmrag::Pipeline pipeline(w.gateway, w.search, w.prompts, config_for({Source::vector, Source::graph, Source::web}, true));
    std::size_t correct = 0;
    std::vector<std::string> first_run;
    for (int run = 0; run < 2; ++run) {
        for (std::size_t i = 0; i < w.facts.size(); ++i) {
            const auto trace = pipeline.run_query(w.question(i), ingested.stores);
            const auto normalized = hmrag::to_json(trace).dump();
            if (run == 0) {
                first_run.push_back(normalized);
                if (trace.final_answer == w.facts[i].mineral) ++correct;
                else c.expect(false, "question " + std::to_string(i) + " answered '" + trace.final_answer + "'");
            } else {
                c.expect(normalized == first_run[i], "question " + std::to_string(i) + ": traces differ between runs");
            }
        }
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(w.facts.size());
    c.expect(accuracy == 1.0, "accuracy " + str(accuracy));

    // The same questions as multiple-choice items through the eval harness.
    const auto dir = world::temp_dir("acceptance_e2e");
    std::vector<hmrag::EvalItem> items;
    for (std::size_t i = 0; i < w.facts.size(); ++i) items.push_back(w.item(i));
    const auto report = hmrag::run_eval(world::write_dataset(dir + "/planted.jsonl", items), pipeline, ingested.stores);
    c.expect(report.accuracy() == 1.0 && report.evaluated == 20, "eval accuracy " + str(report.accuracy()));
    std::filesystem::remove_all(dir);
    return c.outcome("20/20 planted questions answered, accuracy 1.0, repeat traces identical");
}

Outcome ablation_mechanics() {
    Check c;
    auto w = world::make_world();
    const auto ingested = world::ingest(w);
    struct Row {
        std::string name;
        std::set<Source> agents;
        bool decision;
    };
    const std::vector<Row> rows = {
        {"no vector", {Source::graph, Source::web}, true},
        {"no graph", {Source::vector, Source::web}, true},
        {"no web", {Source::vector, Source::graph}, true},
        {"no decision", {Source::vector, Source::graph, Source::web}, false},
        {"full", {Source::vector, Source::graph, Source::web}, true},
    };
    std::ostringstream summary;
    for (const auto& row : rows) {
        hmrag::Pipeline p(w.gateway, w.search, w.prompts, config_for(row.agents, row.decision));
        std::size_t correct = 0;
        for (std::size_t i = 0; i < w.facts.size(); ++i) {
            hmrag::QueryTrace t;
            try {
                t = p.run_query(w.question(i), ingested.stores);
            } catch (const std::exception& e) {
                c.expect(false, row.name + ": question " + std::to_string(i) + " threw " + e.what());
                continue;
            }
            c.expect(t.steps.size() == 1 && t.steps[0].agents.size() == row.agents.size(),
                     row.name + ": wrong number of candidates");
            if (!row.decision) {
                const auto& agents = t.steps[0].agents;
                auto web = std::find_if(agents.begin(), agents.end(),
                                        [](const hmrag::AgentTrace& a) { return a.source == Source::web; });
                c.expect(web != agents.end() && t.final_answer == web->candidate.text,
                         "no-decision answer differs from the web answer for question " + std::to_string(i));
                c.expect(!t.steps[0].report && t.steps[0].decision_calls.empty(),
                         "no-decision row still ran the decision agent");
            } else {
                c.expect(t.steps[0].report.has_value(), row.name + ": missing consensus report");
            }
            if (t.final_answer.rfind(w.facts[i].mineral, 0) == 0) ++correct;
        }
        summary << row.name << " " << correct << "/20; ";
    }
    return c.outcome("all 5 configurations complete; " + summary.str() + "no-decision answers equal web answers");
}

Outcome persistence_roundtrip() {
    Check c;
    auto w = world::make_world();
    const auto ingested = world::ingest(w);
    const auto dir = world::temp_dir("acceptance_store");
    ingested.stores.save(dir);
    const auto loaded = hmrag::Stores::load(dir);
    c.expect(*loaded.index == *ingested.stores.index, "index differs after reload");
    c.expect(*loaded.graph == *ingested.stores.graph, "graph differs after reload");
    c.expect(*loaded.graph_embeddings == *ingested.stores.graph_embeddings, "graph vectors differ after reload");

    // Rebuilding from identical inputs gives a byte-identical index file.
    const auto dir2 = world::temp_dir("acceptance_store2");
    world::ingest(world::make_world()).stores.save(dir2);
    c.expect(hmrag::read_file(dir + "/index.jsonl") == hmrag::read_file(dir2 + "/index.jsonl"),
             "rebuilt index file differs");

    // Hand count: items 0, 1, 2 are answerable, the fourth asks about a
    // province with no record, so 3 of 4 are correct.
    hmrag::Pipeline pipeline(w.gateway, w.search, w.prompts, config_for({Source::vector, Source::graph, Source::web}, true));
    std::vector<hmrag::EvalItem> items = {w.item(0), w.item(1), w.item(2), w.item(w.facts.size())};
    const auto report = hmrag::run_eval(world::write_dataset(dir + "/four.jsonl", items), pipeline, loaded);
    c.expect(report.evaluated == 4 && report.correct == 3, "correct " + std::to_string(report.correct) + "/" +
                                                               std::to_string(report.evaluated));
    c.expect(report.accuracy() == 0.75, "accuracy " + str(report.accuracy()));
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
    return c.outcome("reloaded index, graph and graph vectors are value-identical; 4-question accuracy 0.75");
}

struct Criterion {
    const char* name;
    double limit_s;  // 0 = no stated limit
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {"metric_oracles", 5.0, metric_oracles},
        {"retrieval_exactness", 30.0, retrieval_exactness},
        {"graph_properties", 10.0, graph_properties},
        {"decision_routing", 0.0, decision_routing},
        {"end_to_end_determinism", 60.0, end_to_end_determinism},
        {"ablation_mechanics", 0.0, ablation_mechanics},
        {"persistence_roundtrip", 0.0, persistence_roundtrip},
    };
    std::string only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = argv[++i];
        else if (std::strcmp(argv[i], "--list") == 0) {
            for (const auto& c : criteria) std::cout << c.name << '\n';
            return 0;
        } else {
            std::cerr << "usage: " << argv[0] << " [--criterion NAME | --list]\n";
            return 2;
        }
    }

    int failed = 0;
    bool matched = false;
    for (const auto& cr : criteria) {
        if (!only.empty() && only != cr.name) continue;
        matched = true;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = cr.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (cr.limit_s > 0 && secs >= cr.limit_s) {
            out.ok = false;
            out.detail += " (runtime limit " + str(cr.limit_s) + " s exceeded)";
        }
        std::ostringstream t;
        t.precision(3);
        t << std::fixed << secs << " s";
        if (cr.limit_s > 0) t << " / limit " << str(cr.limit_s) << " s";
        std::cout << (out.ok ? "[PASS] " : "[FAIL] ") << cr.name << " (" << t.str() << "): " << out.detail
                  << std::endl;
        if (!out.ok) ++failed;
    }
    if (!matched) {
        std::cerr << "unknown criterion: " << only << '\n';
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
