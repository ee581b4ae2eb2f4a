#pragma once

#include <cstdint>
#include <vector>

namespace clusterlm {

struct PairedOutcome {
  std::uint64_t improved = 0;  // incorrect -> correct
  std::uint64_t worsened = 0;  // correct -> incorrect
};

// Exact binomial McNemar change test: two-tail p = 2*P(X <= min(b,c)) for
// X ~ Binomial(b+c, 1/2), capped at 1. Throws when both counts are zero.
double mcnemar(const PairedOutcome& p);

// Chi-square variant with continuity correction, for large samples.
double mcnemar_chi2(const PairedOutcome& p);

struct RankTestResult {
  double u = 0;  // U statistic of the first sample, midrank ties
  double p = 0;  // two-tail
  bool exact = false;
};

// Exact enumeration when m+n <= 20, normal approximation with tie
// correction otherwise.
RankTestResult wilcoxon_mann_whitney(const std::vector<double>& xs,
                                     const std::vector<double>& ys);

enum class CorrelationKind { pearson, spearman };

double split_correlation(const std::vector<double>& a,
                         const std::vector<double>& b,
                         CorrelationKind kind = CorrelationKind::pearson);

// Midranks of the pooled sample, in the order of the input values.
std::vector<double> midranks(const std::vector<double>& values);

}  // namespace clusterlm
