#include "hmrag/answer.hpp"

#include "hmrag/errors.hpp"

namespace hmrag {

std::string_view to_string(Source source) {
    switch (source) {
        case Source::vector: return "vector";
        case Source::graph: return "graph";
        case Source::web: return "web";
    }
    return "vector";
}

Source source_from_string(std::string_view name) {
    if (name == "vector") return Source::vector;
    if (name == "graph") return Source::graph;
    if (name == "web") return Source::web;
    throw InvalidArgument("unknown agent: " + std::string(name));
}

AnswerCandidate AnswerCandidate::unavailable(Source source, std::string reason) {
    AnswerCandidate c;
    c.source = source;
    c.available = false;
    c.failure = std::move(reason);
    return c;
}

}  // namespace hmrag
