#include "hmrag/evaluation.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <cctype>
#include <fstream>

namespace hmrag {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxLetters = 5;

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string normalize_choice(std::string_view s) {
    auto t = trim(s);
    while (!t.empty() && t.back() == '.') t.pop_back();
    return to_lower(trim(t));
}

}  // namespace

EvalItem parse_eval_item(const json& j) {
    const std::string raw = j.dump();
    if (!j.is_object()) throw ParseError("record is not an object", raw);
    EvalItem item;
    try {
        item.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                                   : std::string{};
        item.question = j.at("question").get<std::string>();
        item.choices = j.at("choices").get<std::vector<std::string>>();
        const auto& a = j.at("answer");
        if (!a.is_number_integer()) throw ParseError("answer is not an integer index", raw);
        const auto idx = a.get<long long>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= item.choices.size())
            throw ParseError("answer index out of range", raw);
        item.answer = static_cast<std::size_t>(idx);
        if (j.contains("context") && j["context"].is_string()) item.context = j["context"].get<std::string>();
        if (j.contains("image_caption") && j["image_caption"].is_string())
            item.image_caption = j["image_caption"].get<std::string>();
        if (j.contains("tags")) item.tags = j["tags"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed record: ") + e.what(), raw);
    }
    if (trim(item.question).empty()) throw ParseError("question is empty", raw);
    if (item.choices.size() < 2) throw ParseError("fewer than two choices", raw);
    return item;
}

std::string format_eval_question(const EvalItem& item) {
    std::string out = item.question;
    if (!trim(item.context).empty()) out += "\nContext: " + item.context;
    if (!trim(item.image_caption).empty()) out += "\nImage: " + item.image_caption;
    out += "\nOptions:";
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
        const char letter = i < 26 ? static_cast<char>('A' + i) : '?';
        out += "\n(" + std::string(1, letter) + ") " + item.choices[i];
    }
    out += "\nAnswer with the letter of the correct option.";
    return out;
}

std::optional<std::size_t> extract_choice(std::string_view reply,
                                          std::span<const std::string> choices) {
    const std::size_t letters = std::min(kMaxLetters, choices.size());
    for (std::size_t i = 0; i < reply.size(); ++i) {
        const char c = reply[i];
        if (c < 'A' || c >= static_cast<char>('A' + letters)) continue;
        const bool left_ok = i == 0 || !is_word_char(reply[i - 1]);
        const bool right_ok = i + 1 == reply.size() || !is_word_char(reply[i + 1]);
        if (left_ok && right_ok) return static_cast<std::size_t>(c - 'A');
    }
    const auto norm = normalize_choice(reply);
    for (std::size_t i = 0; i < choices.size(); ++i)
        if (!norm.empty() && norm == normalize_choice(choices[i])) return i;
    return std::nullopt;
}

EvalReport run_eval(const std::string& dataset_path, const Pipeline& pipeline, const Stores& stores) {
    std::ifstream in(dataset_path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open dataset: " + dataset_path);
    EvalReport report;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        ++report.total_records;
        EvalItem item;
        try {
            item = parse_eval_item(json::parse(line));
        } catch (const json::parse_error& e) {
            ++report.skipped;
            report.skip_reasons.push_back("line " + std::to_string(lineno) + ": " + e.what());
            continue;
        } catch (const ParseError& e) {
            ++report.skipped;
            report.skip_reasons.push_back("line " + std::to_string(lineno) + ": " + e.what());
            continue;
        }
        if (item.id.empty()) item.id = "line-" + std::to_string(lineno);

        EvalOutcome o;
        o.id = item.id;
        o.gold = item.answer;
        try {
            auto trace = pipeline.run_query(format_eval_question(item), stores);
            o.final_answer = trace.final_answer;
            o.predicted = extract_choice(trace.final_answer, item.choices);
        } catch (const ScriptMiss&) {
            throw;
        } catch (const Error& e) {
            o.error = e.what();
        }
        o.correct = o.predicted && *o.predicted == o.gold;
        ++report.evaluated;
        if (o.correct) ++report.correct;
        for (const auto& tag : item.tags) {
            auto& st = report.per_tag[tag];
            ++st.total;
            if (o.correct) ++st.correct;
        }
        report.outcomes.push_back(std::move(o));
    }
    return report;
}

json to_json(const EvalReport& r) {
    json tags = json::object();
    for (const auto& [tag, st] : r.per_tag) {
        tags[tag] = {{"total", st.total},
                     {"correct", st.correct},
                     {"accuracy", st.total ? static_cast<double>(st.correct) / st.total : 0.0}};
    }
    json items = json::array();
    for (const auto& o : r.outcomes) {
        json j = {{"id", o.id}, {"gold", o.gold}, {"correct", o.correct}, {"final_answer", o.final_answer}};
        j["predicted"] = o.predicted ? json(*o.predicted) : json(nullptr);
        if (!o.error.empty()) j["error"] = o.error;
        items.push_back(std::move(j));
    }
    return {{"total_records", r.total_records},
            {"evaluated", r.evaluated},
            {"correct", r.correct},
            {"accuracy", r.accuracy()},
            {"skipped", r.skipped},
            {"skip_reasons", r.skip_reasons},
            {"per_tag", tags},
            {"items", items}};
}

}  // namespace hmrag
