#include "clusterlm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace clusterlm {

namespace {

// log(sum(exp(xs))) without overflow.
double log_sum_exp(const std::vector<double>& xs) {
  const double hi = *std::max_element(xs.begin(), xs.end());
  double sum = 0;
  for (double x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

double normal_two_tail(double z) {
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

}  // namespace

double mcnemar(const PairedOutcome& p) {
  const std::uint64_t n = p.improved + p.worsened;
  if (n == 0) throw std::runtime_error("no discordant pairs");
  const std::uint64_t m = std::min(p.improved, p.worsened);
  double pval;
  if (n <= 60) {
    // Binomial coefficients stay integral in a long double up to here.
    long double coeff = 1.0L, sum = 0.0L;
    for (std::uint64_t k = 0; k <= m; ++k) {
      sum += coeff;
      coeff = coeff * static_cast<long double>(n - k) / static_cast<long double>(k + 1);
    }
    pval = static_cast<double>(2.0L * sum / std::exp2l(static_cast<long double>(n)));
  } else {
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1);
    std::vector<double> terms;
    terms.reserve(m + 1);
    for (std::uint64_t k = 0; k <= m; ++k) {
      const double lg = lg_n1 - std::lgamma(static_cast<double>(k) + 1) -
                        std::lgamma(static_cast<double>(n - k) + 1) -
                        static_cast<double>(n) * std::log(2.0);
      terms.push_back(lg);
    }
    pval = 2.0 * std::exp(log_sum_exp(terms));
  }
  return std::min(pval, 1.0);
}

double mcnemar_chi2(const PairedOutcome& p) {
  const double b = static_cast<double>(p.improved);
  const double c = static_cast<double>(p.worsened);
  if (b + c == 0) throw std::runtime_error("no discordant pairs");
  const double d = std::max(std::fabs(b - c) - 1.0, 0.0);
  const double chi2 = d * d / (b + c);
  // 1 df: P(X > chi2) = erfc(sqrt(chi2/2)).
  return std::erfc(std::sqrt(chi2 / 2.0));
}

std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

RankTestResult wilcoxon_mann_whitney(const std::vector<double>& xs,
                                     const std::vector<double>& ys) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("both samples must be non-empty");
  const std::size_t m = xs.size(), n = ys.size(), total = m + n;
  std::vector<double> pooled = xs;
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  const std::vector<double> ranks = midranks(pooled);

  double r1 = 0;
  for (std::size_t i = 0; i < m; ++i) r1 += ranks[i];
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  const double u = r1 - static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;

  RankTestResult result;
  result.u = u;
  if (total <= 20) {
    // Enumerate every way of assigning m of the pooled ranks to the first
    // sample; two-tail p is the fraction at least as far from mn/2.
    std::vector<double> sorted_ranks = ranks;
    std::sort(sorted_ranks.begin(), sorted_ranks.end());
    const double dev_obs = std::fabs(u - mn / 2.0);
    std::vector<std::size_t> comb(m);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    std::uint64_t count = 0, totalc = 0;
    while (true) {
      double rsum = 0;
      for (std::size_t idx : comb) rsum += sorted_ranks[idx];
      const double uu = rsum - static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;
      if (std::fabs(uu - mn / 2.0) >= dev_obs - 1e-9) ++count;
      ++totalc;
      // next combination
      std::size_t i = m;
      while (i > 0 && comb[i - 1] == total - m + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < m; ++j) comb[j] = comb[j - 1] + 1;
    }
    result.p = static_cast<double>(count) / static_cast<double>(totalc);
    result.exact = true;
  } else {
    double tie_term = 0;
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
    const double nt = static_cast<double>(total);
    const double var =
        mn * (nt + 1.0) / 12.0 - mn * tie_term / (12.0 * nt * (nt - 1.0));
    if (var <= 0) {
      result.p = 1.0;  // all values tied
    } else {
      const double dev = std::max(std::fabs(u - mn / 2.0) - 0.5, 0.0);
      result.p = normal_two_tail(dev / std::sqrt(var));
    }
  }
  result.p = std::min(result.p, 1.0);
  return result;
}

double split_correlation(const std::vector<double>& a,
                         const std::vector<double>& b, CorrelationKind kind) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  if (a.size() < 3) throw std::invalid_argument("need at least 3 pairs");
  std::vector<double> xs = a, ys = b;
  if (kind == CorrelationKind::spearman) {
    xs = midranks(xs);
    ys = midranks(ys);
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0 || syy == 0) throw std::runtime_error("zero variance sample");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace clusterlm
