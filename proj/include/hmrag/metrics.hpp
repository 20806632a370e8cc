#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hmrag {

/// A similarity value in [0, 1]. `degenerate` marks scores forced to 0
/// because an input was empty or unusable, which is not an error: short
/// model summaries do produce them.
struct MetricScore {
    double value = 0.0;
    bool degenerate = false;
};

/// Tokenization shared by both metrics: case-folded, split on whitespace
/// and punctuation.
std::vector<std::string> metric_tokens(std::string_view text);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// LCS(a, b) / max(|a|, |b|).
MetricScore rouge_l(std::span<const std::string> a, std::span<const std::string> b);

/// exp(sum_n w_n log p_n) * min(1, |reference| / |candidate|), where p_n is
/// the clipped n-gram precision of `candidate` against `reference` and n
/// runs over 1..min(max_n, |candidate|). When the candidate is shorter than
/// max_n the weights of the orders used are renormalized to sum to 1. Any
/// zero precision makes the score 0; there is no smoothing.
///
/// Throws InvalidArgument unless max_n >= 1, weights has max_n non-negative
/// entries, and they sum to 1.
MetricScore bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                 int max_n, std::span<const double> weights);

/// bleu() with uniform weights 1/max_n.
MetricScore bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                 int max_n = 4);

}  // namespace hmrag
