#pragma once

#include "hmrag/answer.hpp"
#include "hmrag/model_gateway.hpp"
#include "hmrag/prompts.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

struct DecisionConfig {
    double fusion_lambda = 0.5;
    double consensus_threshold = 0.5;
    int bleu_max_n = 4;
    int summary_token_budget = 64;

    void validate() const;
};

struct FusedScore {
    double rouge_l = 0.0;
    /// Mean of both BLEU directions.
    double bleu = 0.0;
    double fused = 0.0;
};

/// lambda * ROUGE-L + (1 - lambda) * symmetrized BLEU over two summaries.
FusedScore fused_score(std::string_view summary_a, std::string_view summary_b, double lambda,
                       int bleu_max_n = 4);

/// Throws InvalidArgument when either candidate has no summary.
double fused_similarity(const AnswerCandidate& a, const AnswerCandidate& b, double lambda,
                        int bleu_max_n = 4);

enum class Route { lightweight, expert };
std::string_view to_string(Route route);

struct PairScore {
    Source first = Source::vector;
    Source second = Source::graph;
    FusedScore score;
};

/// Outcome of consistency voting. With a single available candidate there
/// are no pairs, mean_fused is 1 and the route is lightweight.
struct ConsensusReport {
    std::vector<PairScore> pair_scores;
    double mean_fused = 0.0;
    double threshold = 0.0;
    bool consensus = false;
    Route route = Route::expert;
};

/// Pure voting step: pairwise fused scores over available candidates (in
/// the order given), their mean, and the routing decision
/// `mean_fused >= threshold` -> lightweight.
ConsensusReport vote(std::span<const AnswerCandidate> candidates, const DecisionConfig& config);

struct Decision {
    std::string answer;
    ConsensusReport report;
};

/// Arbitrates agent answers: summaries, consistency voting, then one
/// lightweight merge call on agreement or one expert call on conflict.
class DecisionAgent {
public:
    DecisionAgent(PromptLibrary prompts, DecisionConfig config = {});

    /// Leaves unavailable candidates untouched. Summaries are cut to the
    /// configured word budget.
    AnswerCandidate summarize(AnswerCandidate candidate, const ModelGateway& gateway) const;

    /// Throws InvalidArgument when no candidate is available.
    Decision decide(const std::string& query, std::span<const AnswerCandidate> candidates,
                    const ModelGateway& gateway) const;

    const DecisionConfig& config() const { return config_; }

private:
    PromptLibrary prompts_;
    DecisionConfig config_;
};

}  // namespace hmrag
