#include "netanom/significance.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace netanom {

double chance_accuracy(std::uint64_t n_referent, std::uint64_t n_subject) {
  if (n_referent == 0 || n_subject == 0) {
    throw std::invalid_argument("chance_accuracy: both windows need samples");
  }
  return static_cast<double>(n_referent) / static_cast<double>(n_referent + n_subject);
}

double binomial_upper_tail(std::uint64_t n, std::uint64_t k, double p) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double nd = static_cast<double>(n);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = std::lgamma(nd + 1.0);
  auto log_pmf = [&](std::uint64_t j) {
    const double jd = static_cast<double>(j);
    return log_n_fact - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) + jd * log_p +
           (nd - jd) * log_q;
  };
  // Log-sum-exp anchored at the largest term in the tail.
  const auto mode = static_cast<std::uint64_t>(std::floor((nd + 1.0) * p));
  const std::uint64_t anchor = mode >= k ? std::min(mode, n) : k;
  const double top = log_pmf(anchor);
  double sum = 0.0;
  for (std::uint64_t j = k; j <= n; ++j) {
    const double term = std::exp(log_pmf(j) - top);
    sum += term;
    if (j > anchor && term < 1e-18 * sum) break;
  }
  return std::min(1.0, std::exp(top + std::log(sum)));
}

double binomial_upper_tail_normal(std::uint64_t n, std::uint64_t k, double p) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  const double nd = static_cast<double>(n);
  const double mean = nd * p;
  const double sd = std::sqrt(nd * p * (1.0 - p));
  if (sd <= 0.0) return static_cast<double>(k) <= mean ? 1.0 : 0.0;
  const double z = (static_cast<double>(k) - 0.5 - mean) / sd;
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double accuracy_threshold(std::uint64_t n_test, double p, double alpha) {
  if (n_test == 0) throw std::invalid_argument("accuracy_threshold: n_test must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("accuracy_threshold: p must be in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("accuracy_threshold: alpha must be in (0, 1)");
  }
  const bool exact = n_test <= kExactTailLimit;
  auto tail = [&](std::uint64_t k) {
    return exact ? binomial_upper_tail(n_test, k, p) : binomial_upper_tail_normal(n_test, k, p);
  };
  // The tail is non-increasing in k: find the first k with tail(k) < alpha.
  std::uint64_t lo = 0;           // tail(lo) >= alpha (tail(0) == 1)
  std::uint64_t hi = n_test + 1;  // tail(n + 1) == 0 < alpha
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (tail(mid) < alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return static_cast<double>(hi) / static_cast<double>(n_test);
}

}  // namespace netanom
