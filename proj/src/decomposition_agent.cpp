#include "hmrag/decomposition_agent.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <optional>
#include <regex>

namespace hmrag {

namespace {

struct MarkedLine {
    std::optional<int> number;
    bool marked = false;
    std::string body;
};

MarkedLine strip_marker(const std::string& line) {
    static const std::regex numbered(
        R"(^(?:(?:sub-?\s*questions?|questions?|step|q)\s*(\d+)\s*[:.)\-]|\((\d+)\)|(\d+)\s*[.):])\s*)",
        std::regex::icase);
    static const std::regex bullet(R"(^(?:-|\*|•|·)\s*)");
    std::smatch m;
    if (std::regex_search(line, m, numbered)) {
        MarkedLine out;
        out.marked = true;
        for (int g = 1; g <= 3; ++g)
            if (m[g].matched) out.number = std::stoi(m[g].str());
        out.body = trim(m.suffix().str());
        return out;
    }
    if (std::regex_search(line, m, bullet)) return {std::nullopt, true, trim(m.suffix().str())};
    return {std::nullopt, false, line};
}

// Splits "A? 2. B? 3. C?" when the line started with item `n - 1`.
std::vector<std::string> split_inline(std::string body, int next) {
    std::vector<std::string> out;
    while (true) {
        const std::string num = std::to_string(next);
        std::size_t cut = std::string::npos;
        for (const char* sep : {". ", ") ", ": "}) {
            auto p = body.find(" " + num + sep);
            if (p != std::string::npos && (cut == std::string::npos || p < cut)) cut = p;
        }
        if (cut == std::string::npos) break;
        out.push_back(trim(body.substr(0, cut)));
        body = body.substr(cut + 1 + num.size() + 2);
        ++next;
    }
    out.push_back(trim(body));
    return out;
}

std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
    return s;
}

}  // namespace

void SubQueryPlan::validate() const {
    if (multi_intent) {
        if (sub_queries.size() < DecompositionAgent::kMinSubQueries ||
            sub_queries.size() > DecompositionAgent::kMaxSubQueries)
            throw InvalidArgument("multi-intent plan must have 2 or 3 sub-queries");
    } else if (sub_queries.size() != 1 || sub_queries.front() != original) {
        throw InvalidArgument("single-intent plan must contain only the original question");
    }
}

bool parse_intent_judgment(std::string_view reply) {
    bool multi = false;
    bool single = false;
    for (const auto& tok : word_tokens(reply)) {
        if (tok.rfind("single", 0) == 0) single = true;
        if (tok.rfind("multi", 0) == 0) multi = true;
    }
    if (single) return false;
    if (multi) return true;
    throw ParseError("intent judgment names neither single nor multi intent",
                     std::string(reply));
}

std::vector<std::string> parse_sub_questions(std::string_view reply) {
    std::vector<MarkedLine> lines;
    for (const auto& raw : [&] {
             std::vector<std::string> v;
             std::size_t pos = 0;
             while (pos <= reply.size()) {
                 auto nl = reply.find('\n', pos);
                 v.push_back(trim(reply.substr(pos, nl == std::string_view::npos ? nl : nl - pos)));
                 if (nl == std::string_view::npos) break;
                 pos = nl + 1;
             }
             return v;
         }()) {
        if (raw.empty()) continue;
        lines.push_back(strip_marker(raw));
    }

    bool any_marked = false;
    for (const auto& l : lines) any_marked = any_marked || l.marked;

    std::vector<std::string> out;
    for (const auto& l : lines) {
        // With a marked list present, unmarked lines are preamble or commentary.
        if (any_marked && !l.marked) continue;
        std::vector<std::string> parts =
            l.number ? split_inline(l.body, *l.number + 1) : std::vector<std::string>{l.body};
        for (auto& p : parts) {
            p = strip_quotes(p);
            if (!p.empty()) out.push_back(std::move(p));
        }
    }
    return out;
}

DecompositionAgent::DecompositionAgent(PromptLibrary prompts) : prompts_(std::move(prompts)) {}

bool DecompositionAgent::judge_multi_intent(const std::string& question,
                                            const ModelGateway& gateway) const {
    if (trim(question).empty()) throw InvalidArgument("question is empty");
    return parse_intent_judgment(
        gateway.complete_prompt(prompts_.judge_intent.render({{"question", question}})));
}

SubQueryPlan DecompositionAgent::decompose(const std::string& question,
                                           const ModelGateway& gateway) const {
    if (trim(question).empty()) throw InvalidArgument("question is empty");
    SubQueryPlan plan{question, {question}, false, {}};

    bool multi = false;
    try {
        multi = judge_multi_intent(question, gateway);
    } catch (const ParseError& e) {
        plan.warnings.push_back(std::string("intent judgment unparseable, treated as single-intent: ") +
                                e.raw_payload());
        return plan;
    }
    if (!multi) return plan;

    auto subs = parse_sub_questions(
        gateway.complete_prompt(prompts_.decompose.render({{"question", question}})));
    if (subs.size() < kMinSubQueries) {
        plan.warnings.push_back("decomposition produced " + std::to_string(subs.size()) +
                                " sub-question(s), treated as single-intent");
        return plan;
    }
    if (subs.size() > kMaxSubQueries) {
        plan.warnings.push_back("decomposition produced " + std::to_string(subs.size()) +
                                " sub-questions, truncated to " + std::to_string(kMaxSubQueries));
        subs.resize(kMaxSubQueries);
    }
    plan.sub_queries = std::move(subs);
    plan.multi_intent = true;
    return plan;
}

}  // namespace hmrag
