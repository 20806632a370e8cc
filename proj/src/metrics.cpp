#include "hmrag/metrics.hpp"

#include "hmrag/errors.hpp"
#include "hmrag/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hmrag {

namespace {

using NGram = std::vector<std::string>;

std::map<NGram, std::size_t> count_ngrams(std::span<const std::string> tokens, std::size_t n) {
    std::map<NGram, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return counts;
}

}  // namespace

std::vector<std::string> metric_tokens(std::string_view text) { return word_tokens(text); }

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

MetricScore rouge_l(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) return {0.0, true};
    const double denom = static_cast<double>(std::max(a.size(), b.size()));
    return {static_cast<double>(lcs_length(a, b)) / denom, false};
}

MetricScore bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                 int max_n, std::span<const double> weights) {
    if (max_n < 1) throw InvalidArgument("bleu: max_n must be at least 1");
    if (weights.size() != static_cast<std::size_t>(max_n))
        throw InvalidArgument("bleu: need one weight per n-gram order");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidArgument("bleu: weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("bleu: weights must sum to 1");

    if (candidate.empty() || reference.empty()) return {0.0, true};

    const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(max_n), candidate.size());
    double used_weight = 0.0;
    for (std::size_t n = 1; n <= orders; ++n) used_weight += weights[n - 1];
    if (used_weight <= 0.0) return {0.0, true};

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= orders; ++n) {
        const auto cand = count_ngrams(candidate, n);
        const auto ref = count_ngrams(reference, n);
        std::size_t matched = 0;
        for (const auto& [gram, c] : cand) {
            auto it = ref.find(gram);
            if (it != ref.end()) matched += std::min(c, it->second);
        }
        if (matched == 0) return {0.0, false};
        const double p = static_cast<double>(matched) / static_cast<double>(candidate.size() - n + 1);
        log_sum += (weights[n - 1] / used_weight) * std::log(p);
    }
    const double brevity =
        std::min(1.0, static_cast<double>(reference.size()) / static_cast<double>(candidate.size()));
    return {std::clamp(std::exp(log_sum) * brevity, 0.0, 1.0), false};
}

MetricScore bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                 int max_n) {
    if (max_n < 1) throw InvalidArgument("bleu: max_n must be at least 1");
    std::vector<double> w(static_cast<std::size_t>(max_n), 1.0 / max_n);
    return bleu(candidate, reference, max_n, w);
}

}  // namespace hmrag
