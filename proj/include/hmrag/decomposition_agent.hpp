#pragma once

#include "hmrag/model_gateway.hpp"
#include "hmrag/prompts.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

/// Result of query analysis. Single-intent plans carry the original
/// question as their only sub-query; multi-intent plans carry 2 or 3.
struct SubQueryPlan {
    std::string original;
    std::vector<std::string> sub_queries;
    bool multi_intent = false;
    std::vector<std::string> warnings;

    void validate() const;
};

/// Maps a judgment reply to multi-intent (true) or single-intent (false).
/// "single" anywhere wins; otherwise "multi" means true. Throws ParseError
/// when neither word occurs.
bool parse_intent_judgment(std::string_view reply);

/// Extracts sub-questions from a numbered, bulleted or line-delimited
/// reply. Numbering prefixes and blank lines are dropped; an inline list
/// such as "1. A? 2. B?" is split at its consecutive numbers.
std::vector<std::string> parse_sub_questions(std::string_view reply);

class DecompositionAgent {
public:
    static constexpr std::size_t kMaxSubQueries = 3;
    static constexpr std::size_t kMinSubQueries = 2;

    explicit DecompositionAgent(PromptLibrary prompts);

    bool judge_multi_intent(const std::string& question, const ModelGateway& gateway) const;
    SubQueryPlan decompose(const std::string& question, const ModelGateway& gateway) const;

private:
    PromptLibrary prompts_;
};

}  // namespace hmrag
