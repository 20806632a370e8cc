#pragma once

#include "hmrag/pipeline.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

/// One multiple-choice item: {id, question, choices, answer (0-based),
/// optional context, image_caption and tags}.
struct EvalItem {
    std::string id;
    std::string question;
    std::vector<std::string> choices;
    std::size_t answer = 0;
    std::string context;
    std::string image_caption;
    std::vector<std::string> tags;
};

/// Throws ParseError when the record lacks a field or the answer index is
/// out of range.
EvalItem parse_eval_item(const nlohmann::json& record);

/// Question, optional context and caption, then lettered options.
std::string format_eval_question(const EvalItem& item);

/// First standalone option letter (A, B, ...) in the reply; failing that,
/// an exact case-insensitive match against one of the choices.
std::optional<std::size_t> extract_choice(std::string_view reply,
                                          std::span<const std::string> choices);

struct EvalOutcome {
    std::string id;
    std::optional<std::size_t> predicted;
    std::size_t gold = 0;
    bool correct = false;
    std::string final_answer;
    std::string error;
};

struct TagStats {
    std::size_t total = 0;
    std::size_t correct = 0;
};

struct EvalReport {
    std::size_t total_records = 0;
    std::size_t evaluated = 0;
    std::size_t correct = 0;
    std::size_t skipped = 0;
    std::vector<std::string> skip_reasons;
    std::map<std::string, TagStats> per_tag;
    std::vector<EvalOutcome> outcomes;

    double accuracy() const {
        return evaluated == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(evaluated);
    }
};

/// Runs every well-formed record of a JSON-lines dataset through the
/// pipeline. Malformed records are skipped and counted; queries that fail
/// count as answered incorrectly.
EvalReport run_eval(const std::string& dataset_path, const Pipeline& pipeline, const Stores& stores);

nlohmann::json to_json(const EvalReport& report);

}  // namespace hmrag
