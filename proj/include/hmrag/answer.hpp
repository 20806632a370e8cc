#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

enum class Source { vector, graph, web };

std::string_view to_string(Source source);
Source source_from_string(std::string_view name);

/// An answer produced by one retrieval agent.
struct AnswerCandidate {
    std::string text;
    Source source = Source::vector;
    std::vector<std::string> evidence;
    std::optional<std::string> summary;
    bool available = true;
    /// Why the candidate is unavailable; empty otherwise.
    std::string failure;

    static AnswerCandidate unavailable(Source source, std::string reason);

    bool operator==(const AnswerCandidate&) const = default;
};

}  // namespace hmrag
