#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

/// Plain-text template with `{name}` placeholders. Substitution is a single
/// pass, so braces inside substituted values are never expanded again, and
/// placeholders without a value (or JSON braces) are left untouched.
class PromptTemplate {
public:
    PromptTemplate() = default;
    explicit PromptTemplate(std::string text);

    std::string render(const std::map<std::string, std::string, std::less<>>& vars) const;
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

/// Every prompt the pipeline sends. Defaults are compiled in from the
/// repository's prompts/ directory; `load_overrides` replaces any template
/// for which `<dir>/<name>.txt` exists.
struct PromptLibrary {
    PromptTemplate caption_instruction;
    PromptTemplate caption_refine;
    PromptTemplate extraction;
    PromptTemplate judge_intent;
    PromptTemplate decompose;
    PromptTemplate vector_context_header;
    PromptTemplate keyword_extraction;
    PromptTemplate graph_answer;
    PromptTemplate web_answer;
    PromptTemplate summarize;
    PromptTemplate lightweight_refine;
    PromptTemplate expert_refine;
    PromptTemplate final_refine;

    static PromptLibrary defaults();
    static std::vector<std::string> names();

    PromptTemplate& by_name(std::string_view name);
    const PromptTemplate& by_name(std::string_view name) const;

    /// Returns the number of templates replaced.
    std::size_t load_overrides(const std::string& dir);
    void override_from_file(std::string_view name, const std::string& path);
};

}  // namespace hmrag
