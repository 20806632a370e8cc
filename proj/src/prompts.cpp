#include "hmrag/prompts.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <cctype>
#include <filesystem>

namespace hmrag {

namespace detail {
const std::map<std::string, std::string>& embedded_prompts();
}

namespace {

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(strip_trailing_newlines(std::move(text))) {}

std::string PromptTemplate::render(
    const std::map<std::string, std::string, std::less<>>& vars) const {
    std::string out;
    out.reserve(text_.size());
    std::size_t i = 0;
    while (i < text_.size()) {
        if (text_[i] == '{') {
            std::size_t j = i + 1;
            while (j < text_.size() && is_ident_char(text_[j])) ++j;
            if (j < text_.size() && text_[j] == '}' && j > i + 1) {
                auto it = vars.find(std::string_view(text_).substr(i + 1, j - i - 1));
                if (it != vars.end()) {
                    out += it->second;
                    i = j + 1;
                    continue;
                }
            }
        }
        out += text_[i++];
    }
    return out;
}

std::vector<std::string> PromptLibrary::names() {
    return {"caption_instruction", "caption_refine",    "extraction",
            "judge_intent",        "decompose",         "vector_context_header",
            "keyword_extraction",  "graph_answer",      "web_answer",
            "summarize",           "lightweight_refine", "expert_refine",
            "final_refine"};
}

PromptTemplate& PromptLibrary::by_name(std::string_view name) {
    if (name == "caption_instruction") return caption_instruction;
    if (name == "caption_refine") return caption_refine;
    if (name == "extraction") return extraction;
    if (name == "judge_intent") return judge_intent;
    if (name == "decompose") return decompose;
    if (name == "vector_context_header") return vector_context_header;
    if (name == "keyword_extraction") return keyword_extraction;
    if (name == "graph_answer") return graph_answer;
    if (name == "web_answer") return web_answer;
    if (name == "summarize") return summarize;
    if (name == "lightweight_refine") return lightweight_refine;
    if (name == "expert_refine") return expert_refine;
    if (name == "final_refine") return final_refine;
    throw InvalidArgument("unknown prompt template: " + std::string(name));
}

const PromptTemplate& PromptLibrary::by_name(std::string_view name) const {
    return const_cast<PromptLibrary*>(this)->by_name(name);
}

PromptLibrary PromptLibrary::defaults() {
    PromptLibrary lib;
    const auto& embedded = detail::embedded_prompts();
    for (const auto& name : names()) {
        auto it = embedded.find(name);
        if (it == embedded.end()) throw Error("prompt missing from build: " + name);
        lib.by_name(name) = PromptTemplate(it->second);
    }
    return lib;
}

std::size_t PromptLibrary::load_overrides(const std::string& dir) {
    std::size_t replaced = 0;
    for (const auto& name : names()) {
        auto path = std::filesystem::path(dir) / (name + ".txt");
        std::error_code ec;
        if (std::filesystem::is_regular_file(path, ec)) {
            by_name(name) = PromptTemplate(read_file(path.string()));
            ++replaced;
        }
    }
    return replaced;
}

void PromptLibrary::override_from_file(std::string_view name, const std::string& path) {
    by_name(name) = PromptTemplate(read_file(path));
}

}  // namespace hmrag
