#include "hmrag/config.hpp"
#include "hmrag/text.hpp"
#include "world.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sys/wait.h>

using namespace hmrag;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Passes calls through and remembers each (turns, reply) pair so the CLI
// can replay them from a script file.
class RecordingChat : public ChatModel {
public:
    explicit RecordingChat(std::shared_ptr<const ChatModel> inner) : inner_(std::move(inner)) {}
    std::string complete(std::span<const ChatTurn> turns, const DecodingParams& params) const override {
        auto reply = inner_->complete(turns, params);
        json t = json::array();
        for (const auto& turn : turns) t.push_back({{"role", to_string(turn.role)}, {"content", turn.content}});
        std::lock_guard lock(mu_);
        lines_[t.dump()] = reply;
        return reply;
    }
    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::trunc);
        for (const auto& [turns, reply] : lines_)
            out << json{{"turns", json::parse(turns)}, {"response", reply}}.dump() << '\n';
    }

private:
    std::shared_ptr<const ChatModel> inner_;
    mutable std::mutex mu_;
    mutable std::map<std::string, std::string> lines_;
};

struct Run {
    int rc = -1;
    std::string out;
};

Run run_cli(const std::string& args) {
    const std::string cmd = std::string(HMRAG_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string quoted(const std::string& s) { return "'" + s + "'"; }

class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new std::string(world::temp_dir("cli"));
        w_ = new world::World(world::make_world());
        auto& w = *w_;
        auto recorder = std::make_shared<RecordingChat>(w.chat);
        ModelGateway gw = w.gateway;
        gw.set_chat(ModelRole::chat, recorder);

        auto ingest = ingest_corpus(w.corpus, gw, w.prompts);
        auto run = [&](std::set<Source> agents, bool decision, const std::string& q) {
            PipelineConfig cfg;
            cfg.enabled_agents = std::move(agents);
            cfg.decision_enabled = decision;
            Pipeline(gw, w.search, w.prompts, cfg).run_query(q, ingest.stores);
        };
        const std::set<Source> all = {Source::vector, Source::graph, Source::web};
        run(all, true, w.question(0));
        run(all, false, w.question(1));
        run({Source::vector, Source::web}, true, w.question(2));
        std::vector<EvalItem> items;
        for (std::size_t i = 0; i < 4; ++i) {
            items.push_back(w.item(i));
            run(all, true, format_eval_question(w.item(i)));
        }
        world::write_dataset(*dir_ + "/data.jsonl", items);
        recorder->write(*dir_ + "/chat.jsonl");

        json captions = json::object();
        for (const auto& f : w.facts)
            if (f.image_ref)
                captions[*f.image_ref] = "a photograph of " + f.mineral + " crystals collected in " + f.province;
        std::ofstream(*dir_ + "/captions.json") << captions.dump();
        std::ofstream(*dir_ + "/search.json") << w.search_fixture.dump();
        {
            std::ofstream corpus(*dir_ + "/corpus.jsonl");
            for (const auto& r : w.corpus) {
                json j = {{"id", r.id}, {"text", r.text}};
                if (r.image_ref) j["image_ref"] = *r.image_ref;
                corpus << j.dump() << '\n';
            }
        }
        std::ofstream(*dir_ + "/hmrag.conf") << "chat.backend = scripted\n"
                                                "chat.script = chat.jsonl\n"
                                                "embedding.backend = hashing\n"
                                                "embedding.hashing_dim = 64\n"
                                                "caption.backend = scripted\n"
                                                "caption.script = captions.json\n"
                                                "web.backend = stub\n"
                                                "web.stub_fixture_path = search.json\n";
    }
    static void TearDownTestSuite() {
        delete w_;
        delete dir_;
    }

    static std::string conf() { return "--config " + quoted(*dir_ + "/hmrag.conf"); }

    // Ingest once per test process; every test needs the store.
    static std::string store() {
        const auto s = *dir_ + "/store";
        if (!fs::exists(s + "/index.jsonl")) {
            const auto r = run_cli(conf() + " ingest --corpus " + quoted(*dir_ + "/corpus.jsonl") +
                                   " --out " + quoted(s));
            EXPECT_EQ(r.rc, 0);
        }
        return s;
    }

    static std::string* dir_;
    static world::World* w_;
};
std::string* CliTest::dir_ = nullptr;
world::World* CliTest::w_ = nullptr;

}  // namespace

TEST_F(CliTest, IngestWritesStoresAndReport) {
    const auto out = *dir_ + "/store_ingest";
    const auto r = run_cli(conf() + " ingest --corpus " + quoted(*dir_ + "/corpus.jsonl") + " --out " +
                           quoted(out));
    ASSERT_EQ(r.rc, 0) << r.out;
    const auto report = json::parse(r.out);
    EXPECT_EQ(report.at("records"), 20);
    EXPECT_EQ(report.at("captioned"), 5);
    EXPECT_EQ(report.at("chunks"), 20);
    EXPECT_GT(report.at("triplets").get<int>(), 40);
    for (const char* f : {"index.jsonl", "graph.jsonl", "graph_vectors.jsonl"})
        EXPECT_TRUE(fs::exists(out + "/" + f)) << f;
}

TEST_F(CliTest, QueryPrintsTraceWithTiming) {
    const auto r = run_cli(conf() + " query --store " + quoted(store()) + " " + quoted(w_->question(0)));
    ASSERT_EQ(r.rc, 0) << r.out;
    const auto trace = json::parse(r.out);
    EXPECT_EQ(trace.at("final_answer"), w_->facts[0].mineral);
    EXPECT_TRUE(trace.contains("elapsed_ms"));
    EXPECT_EQ(trace.at("steps").at(0).at("agents").size(), 3u);
}

TEST_F(CliTest, QueryWritesTraceFile) {
    const auto path = *dir_ + "/trace.json";
    const auto r = run_cli(conf() + " query --store " + quoted(store()) + " --trace " + quoted(path) + " " +
                           quoted(w_->question(0)));
    ASSERT_EQ(r.rc, 0);
    EXPECT_EQ(trim(r.out), w_->facts[0].mineral);
    const auto trace = json::parse(read_file(path));
    EXPECT_EQ(trace.at("question"), w_->question(0));
}

TEST_F(CliTest, AblationFlags) {
    auto r = run_cli(conf() + " query --store " + quoted(store()) + " --no-decision " +
                     quoted(w_->question(1)));
    ASSERT_EQ(r.rc, 0) << r.out;
    auto trace = json::parse(r.out);
    EXPECT_EQ(trace.at("final_answer"), w_->facts[1].mineral + " [2]");
    EXPECT_TRUE(trace.at("steps").at(0).at("consensus").is_null());

    r = run_cli(conf() + " query --store " + quoted(store()) + " --disable-agent graph " +
                quoted(w_->question(2)));
    ASSERT_EQ(r.rc, 0) << r.out;
    trace = json::parse(r.out);
    EXPECT_EQ(trace.at("final_answer"), w_->facts[2].mineral);
    EXPECT_EQ(trace.at("steps").at(0).at("agents").size(), 2u);

    r = run_cli(conf() + " query --store " + quoted(store()) + " --disable-agent nonsense " +
                quoted(w_->question(2)));
    EXPECT_NE(r.rc, 0);
}

TEST_F(CliTest, EvalWritesReport) {
    const auto report = *dir_ + "/report.json";
    const auto r = run_cli(conf() + " eval --store " + quoted(store()) + " --dataset " +
                           quoted(*dir_ + "/data.jsonl") + " --report " + quoted(report));
    ASSERT_EQ(r.rc, 0) << r.out;
    EXPECT_EQ(trim(r.out), "accuracy 1 (4/4, skipped 0)");
    const auto j = json::parse(read_file(report));
    EXPECT_EQ(j.at("correct"), 4);
    EXPECT_EQ(j.at("items").size(), 4u);
}

TEST_F(CliTest, ConfigPrintsDefaults) {
    const auto r = run_cli("config --print-defaults");
    ASSERT_EQ(r.rc, 0);
    EXPECT_EQ(r.out.rfind("# hmrag default configuration\n", 0), 0u);
    const auto parsed = KeyValueConfig::parse(r.out);
    EXPECT_EQ(parsed.dump(), HmragConfig::defaults().to_key_values().dump());

    const auto loaded = run_cli(conf() + " config");
    ASSERT_EQ(loaded.rc, 0);
    EXPECT_NE(loaded.out.find("chat.backend = scripted"), std::string::npos) << loaded.out;
}

TEST_F(CliTest, BadInvocationsFail) {
    EXPECT_NE(run_cli("").rc, 0);
    EXPECT_NE(run_cli("query").rc, 0);
    EXPECT_NE(run_cli("--config /nonexistent.conf config").rc, 0);
    EXPECT_NE(run_cli(conf() + " query --store /nonexistent/store 'q?'").rc, 0);
}
