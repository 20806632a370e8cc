#include "hmrag/config.hpp"
#include "hmrag/errors.hpp"
#include "hmrag/evaluation.hpp"
#include "hmrag/knowledge.hpp"
#include "hmrag/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw hmrag::InvalidArgument("cannot write file: " + path);
    out << text;
    if (!out) throw hmrag::Error("failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-source retrieval-augmented question answering"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Key-value config file (default: $HMRAG_CONFIG)");

    auto* ingest = app.add_subcommand("ingest", "Build the index and knowledge graph from a corpus");
    std::string corpus_path, out_dir;
    ingest->add_option("--corpus", corpus_path, "JSON-lines corpus {id, text, image_ref}")->required();
    ingest->add_option("--out", out_dir, "Store directory to write")->required();

    auto* query = app.add_subcommand("query", "Answer one question");
    std::string store_dir, trace_path, question;
    std::vector<std::string> disabled;
    bool no_decision = false;
    query->add_option("--store", store_dir, "Store directory from `ingest`")->required();
    query->add_option("--disable-agent", disabled, "Agent to switch off (repeatable)")
        ->check(CLI::IsMember({"vector", "graph", "web"}));
    query->add_flag("--no-decision", no_decision, "Skip arbitration and take the web answer");
    query->add_option("--trace", trace_path, "Write the JSON trace here instead of stdout");
    query->add_option("question", question, "The question")->required();

    auto* eval = app.add_subcommand("eval", "Score a multiple-choice dataset");
    std::string eval_store, dataset_path, report_path;
    eval->add_option("--store", eval_store, "Store directory from `ingest`")->required();
    eval->add_option("--dataset", dataset_path, "JSON-lines dataset")->required();
    eval->add_option("--report", report_path, "Where to write the JSON report")->required();

    auto* config = app.add_subcommand("config", "Inspect configuration");
    bool print_defaults = false;
    config->add_flag("--print-defaults", print_defaults, "Print the default configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*config) {
            if (print_defaults) {
                std::cout << "# hmrag default configuration\n"
                          << hmrag::HmragConfig::defaults().to_key_values().dump();
            } else {
                std::cout << hmrag::HmragConfig::load(config_path.empty()
                                                          ? std::nullopt
                                                          : std::optional<std::string>(config_path))
                                 .to_key_values()
                                 .dump();
            }
            return 0;
        }

        auto cfg = hmrag::HmragConfig::load(config_path.empty() ? std::nullopt
                                                                : std::optional<std::string>(config_path));
        const auto prompts = hmrag::make_prompts(cfg);
        const auto gateway = hmrag::make_gateway(cfg);

        if (*ingest) {
            const auto records = hmrag::load_corpus(corpus_path);
            auto result = hmrag::ingest_corpus(records, gateway, prompts, cfg.chunk_size, cfg.chunk_overlap);
            result.stores.save(out_dir);
            std::cout << hmrag::to_json(result.report).dump(2) << '\n';
            return 0;
        }

        if (*query) {
            for (const auto& name : disabled) cfg.pipeline.enabled_agents.erase(hmrag::source_from_string(name));
            if (no_decision) cfg.pipeline.decision_enabled = false;
            const auto stores = hmrag::Stores::load(store_dir, &gateway);
            std::shared_ptr<const hmrag::SearchClient> search;
            if (cfg.pipeline.enabled_agents.count(hmrag::Source::web)) search = hmrag::make_search_client(cfg);
            hmrag::Pipeline pipeline(gateway, search, prompts, cfg.pipeline);
            int rc = 0;
            hmrag::QueryTrace trace;
            try {
                trace = pipeline.run_query(question, stores);
            } catch (const hmrag::QueryFailed& e) {
                std::cerr << "hmrag: " << e.what() << '\n';
                trace = e.trace();
                rc = 1;
            }
            const auto text = hmrag::to_json(trace, true).dump(2) + "\n";
            if (trace_path.empty()) {
                std::cout << text;
            } else {
                write_text(trace_path, text);
                if (rc == 0) std::cout << trace.final_answer << '\n';
            }
            return rc;
        }

        if (*eval) {
            const auto stores = hmrag::Stores::load(eval_store, &gateway);
            std::shared_ptr<const hmrag::SearchClient> search;
            if (cfg.pipeline.enabled_agents.count(hmrag::Source::web)) search = hmrag::make_search_client(cfg);
            hmrag::Pipeline pipeline(gateway, search, prompts, cfg.pipeline);
            const auto report = hmrag::run_eval(dataset_path, pipeline, stores);
            write_text(report_path, hmrag::to_json(report).dump(2) + "\n");
            std::cout << "accuracy " << report.accuracy() << " (" << report.correct << "/"
                      << report.evaluated << ", skipped " << report.skipped << ")\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "hmrag: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
