#include "hmrag/decision_agent.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/metrics.hpp"
#include "hmrag/text.hpp"

#include <algorithm>

namespace hmrag {

void DecisionConfig::validate() const {
    if (!(fusion_lambda >= 0.0 && fusion_lambda <= 1.0))
        throw InvalidArgument("fusion_lambda must lie in [0, 1]");
    if (!(consensus_threshold >= 0.0 && consensus_threshold <= 1.0))
        throw InvalidArgument("consensus_threshold must lie in [0, 1]");
    if (bleu_max_n < 1) throw InvalidArgument("bleu_max_n must be at least 1");
    if (summary_token_budget < 1) throw InvalidArgument("summary_token_budget must be at least 1");
}

std::string_view to_string(Route route) {
    return route == Route::lightweight ? "lightweight" : "expert";
}

FusedScore fused_score(std::string_view summary_a, std::string_view summary_b, double lambda,
                       int bleu_max_n) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
    const auto a = metric_tokens(summary_a);
    const auto b = metric_tokens(summary_b);
    FusedScore s;
    s.rouge_l = rouge_l(a, b).value;
    s.bleu = (bleu(a, b, bleu_max_n).value + bleu(b, a, bleu_max_n).value) / 2.0;
    s.fused = std::clamp(lambda * s.rouge_l + (1.0 - lambda) * s.bleu, 0.0, 1.0);
    return s;
}

double fused_similarity(const AnswerCandidate& a, const AnswerCandidate& b, double lambda,
                        int bleu_max_n) {
    if (!a.summary || !b.summary) throw InvalidArgument("fused_similarity: summary missing");
    return fused_score(*a.summary, *b.summary, lambda, bleu_max_n).fused;
}

ConsensusReport vote(std::span<const AnswerCandidate> candidates, const DecisionConfig& config) {
    config.validate();
    std::vector<const AnswerCandidate*> available;
    for (const auto& c : candidates)
        if (c.available) available.push_back(&c);
    if (available.empty()) throw InvalidArgument("no available candidate to vote on");

    ConsensusReport report;
    report.threshold = config.consensus_threshold;
    if (available.size() == 1) {
        report.mean_fused = 1.0;
    } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < available.size(); ++i) {
            for (std::size_t j = i + 1; j < available.size(); ++j) {
                const auto& a = *available[i];
                const auto& b = *available[j];
                if (!a.summary || !b.summary)
                    throw InvalidArgument("candidate summary missing before voting");
                PairScore ps{a.source, b.source,
                             fused_score(*a.summary, *b.summary, config.fusion_lambda,
                                         config.bleu_max_n)};
                sum += ps.score.fused;
                report.pair_scores.push_back(ps);
            }
        }
        report.mean_fused = sum / static_cast<double>(report.pair_scores.size());
    }
    report.consensus = report.mean_fused >= report.threshold;
    report.route = report.consensus ? Route::lightweight : Route::expert;
    return report;
}

DecisionAgent::DecisionAgent(PromptLibrary prompts, DecisionConfig config)
    : prompts_(std::move(prompts)), config_(config) {
    config_.validate();
}

AnswerCandidate DecisionAgent::summarize(AnswerCandidate candidate,
                                         const ModelGateway& gateway) const {
    if (!candidate.available) return candidate;
    DecodingParams params;
    params.max_tokens = config_.summary_token_budget;
    try {
        const std::string reply = gateway.complete_prompt(
            prompts_.summarize.render({{"answer", candidate.text},
                                       {"budget", std::to_string(config_.summary_token_budget)}}),
            ModelRole::lightweight_chat, params);
        auto words = split_whitespace(reply);
        if (words.size() > static_cast<std::size_t>(config_.summary_token_budget))
            words.resize(static_cast<std::size_t>(config_.summary_token_budget));
        candidate.summary = join(words, " ");
    } catch (const BackendError& e) {
        return AnswerCandidate::unavailable(candidate.source, e.what());
    }
    return candidate;
}

Decision DecisionAgent::decide(const std::string& query,
                               std::span<const AnswerCandidate> candidates,
                               const ModelGateway& gateway) const {
    Decision d;
    d.report = vote(candidates, config_);

    std::string answers;
    std::string evidence;
    for (const auto& c : candidates) {
        if (!c.available) continue;
        const std::string tag = "[" + std::string(to_string(c.source)) + "] ";
        answers += (answers.empty() ? "" : "\n") + tag + c.text;
        for (const auto& e : c.evidence) evidence += (evidence.empty() ? "" : "\n") + tag + e;
    }
    if (evidence.empty()) evidence = "(none)";

    if (d.report.route == Route::lightweight) {
        d.answer = trim(gateway.complete_prompt(
            prompts_.lightweight_refine.render({{"question", query}, {"answers", answers}}),
            ModelRole::lightweight_chat));
    } else {
        d.answer = trim(gateway.complete_prompt(
            prompts_.expert_refine.render(
                {{"question", query}, {"answers", answers}, {"evidence", evidence}}),
            ModelRole::expert_chat));
    }
    return d;
}

}  // namespace hmrag
