#include "hmrag/errors.hpp"
#include "hmrag/scripted_backends.hpp"
#include "hmrag/web_agent.hpp"
#include "world.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace hmrag;
using nlohmann::json;

namespace {

json result(int pos, const std::string& title) {
    return {{"title", title}, {"snippet", title + " snippet"}, {"link", "https://ex.org/" + std::to_string(pos)}, {"position", pos}};
}

std::string planets_body() {
    return json{{"organic", {result(3, "Saturn"), result(1, "Jupiter"), result(2, "Neptune")}}}.dump();
}

std::shared_ptr<StubSearchClient> stub() {
    auto s = std::make_shared<StubSearchClient>();
    s->add("largest planet", planets_body());
    return s;
}

}  // namespace

TEST(SearchParsing, SortedByPosition) {
    auto r = parse_search_response(planets_body(), SearchConfig{});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].title, "Jupiter");
    EXPECT_EQ(r[1].position, 2);
    EXPECT_EQ(r[2].url, "https://ex.org/3");
}

TEST(SearchParsing, TruncatedToNumResults) {
    SearchConfig cfg;
    cfg.num_results = 2;
    auto r = parse_search_response(planets_body(), cfg);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].position, 1);
    EXPECT_EQ(r[1].position, 2);
}

TEST(SearchParsing, InvariantViolationsRejected) {
    EXPECT_THROW(parse_search_response(json{{"organic", {result(1, "a"), result(1, "b")}}}.dump(), {}), InvalidArgument);
    auto no_url = result(1, "a");
    no_url["link"] = "";
    EXPECT_THROW(parse_search_response(json{{"organic", {no_url}}}.dump(), {}), InvalidArgument);
    try {
        parse_search_response("<html>", {});
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.raw_payload(), "<html>");
    }
    EXPECT_THROW(parse_search_response(R"({"organic": 3})", {}), ParseError);
    SearchConfig bad;
    bad.num_results = 0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(SearchParsing, MissingOrganicIsEmpty) {
    EXPECT_TRUE(parse_search_response(R"({"answerBox": {}})", {}).empty());
}

TEST(StubSearch, FixtureFileAndMisses) {
    const auto dir = world::temp_dir("stub");
    std::ofstream(dir + "/f.json") << json{{"largest planet", json::parse(planets_body())}}.dump();
    auto s = StubSearchClient::from_fixture(dir + "/f.json");
    EXPECT_EQ(parse_search_response(s.fetch("largest planet", {}), {}).size(), 3u);
    EXPECT_TRUE(parse_search_response(s.fetch("unknown", {}), {}).empty());
    std::ofstream(dir + "/bad.json") << "[1, 2]";
    EXPECT_THROW(StubSearchClient::from_fixture(dir + "/bad.json"), ParseError);
    std::filesystem::remove_all(dir);
}

TEST(WebAgent, SearchRecordsCallInLog) {
    WebRetrievalAgent agent(stub(), SearchConfig{}, PromptLibrary::defaults());
    CallLog log;
    auto r = agent.search("largest planet", &log);
    EXPECT_EQ(r.size(), 3u);
    ASSERT_EQ(log.size(), 1u);
    EXPECT_EQ(log.snapshot()[0].role, ModelRole::search);
    EXPECT_EQ(log.snapshot()[0].request, "largest planet");
    EXPECT_THROW(agent.search(" "), InvalidArgument);
    EXPECT_THROW(WebRetrievalAgent(nullptr, SearchConfig{}, PromptLibrary::defaults()), InvalidArgument);
}

TEST(WebAgent, ParseFailureRecordedWithRawBody) {
    auto s = std::make_shared<StubSearchClient>();
    s->add("q", "not json");
    WebRetrievalAgent agent(s, SearchConfig{}, PromptLibrary::defaults());
    CallLog log;
    EXPECT_THROW(agent.search("q", &log), ParseError);
    ASSERT_EQ(log.size(), 1u);
    EXPECT_FALSE(log.snapshot()[0].ok);
    EXPECT_EQ(log.snapshot()[0].response, "not json");
}

TEST(WebAgent, AnswersWithAttribution) {
    const auto prompts = PromptLibrary::defaults();
    SearchConfig cfg;
    cfg.num_results = 2;
    WebRetrievalAgent agent(stub(), cfg, prompts);
    auto results = agent.search("largest planet");
    const auto listing = WebRetrievalAgent::format_results(results);
    EXPECT_EQ(listing,
              "[1] Jupiter — Jupiter snippet (https://ex.org/1)\n[2] Neptune — Neptune snippet (https://ex.org/2)");

    auto chat = std::make_shared<ScriptedChatModel>();
    chat->add_prompt(prompts.web_answer.render({{"question", "largest planet"}, {"results", listing}}), "Jupiter. [1]");
    ModelGateway gw;
    gw.set_chat(ModelRole::chat, chat);
    auto c = agent.answer("largest planet", results, gw);
    EXPECT_EQ(c.text, "Jupiter. [1]");
    EXPECT_EQ(c.source, Source::web);
    // Every evidence URL comes from the input results.
    ASSERT_EQ(c.evidence.size(), 2u);
    for (const auto& url : c.evidence) {
        bool found = false;
        for (const auto& r : results) found = found || r.url == url;
        EXPECT_TRUE(found) << url;
    }
    EXPECT_EQ(agent.answer("largest planet", results, gw), c);
}

TEST(WebAgent, EmptyResultsSaySo) {
    const auto prompts = PromptLibrary::defaults();
    WebRetrievalAgent agent(stub(), SearchConfig{}, prompts);
    auto chat = std::make_shared<ScriptedChatModel>();
    chat->add_responder([](std::span<const ChatTurn> t) -> std::optional<std::string> {
        if (t.back().content.find("no web evidence") != std::string::npos) return "No web evidence found.";
        return std::nullopt;
    });
    ModelGateway gw;
    gw.set_chat(ModelRole::chat, chat);
    auto c = agent.answer("q", {}, gw);
    EXPECT_EQ(c.text, "No web evidence found.");
    EXPECT_TRUE(c.evidence.empty());
}

TEST(WebAgent, BackendFailureGivesUnavailable) {
    struct Down : ChatModel {
        std::string complete(std::span<const ChatTurn>, const DecodingParams&) const override {
            throw BackendRejected("401");
        }
    };
    WebRetrievalAgent agent(stub(), SearchConfig{}, PromptLibrary::defaults());
    ModelGateway gw;
    gw.set_chat(ModelRole::chat, std::make_shared<Down>());
    EXPECT_FALSE(agent.answer("q", {}, gw).available);
}
