#pragma once

#include <cstdint>

namespace netanom {

/// Accuracy of always predicting the referent class:
/// n_referent / (n_referent + n_subject).
double chance_accuracy(std::uint64_t n_referent, std::uint64_t n_subject);

/// P(X >= k) for X ~ Binomial(n, p), summed exactly in log space.
double binomial_upper_tail(std::uint64_t n, std::uint64_t k, double p);

/// Normal approximation of P(X >= k) with continuity correction.
double binomial_upper_tail_normal(std::uint64_t n, std::uint64_t k, double p);

/// Largest n_test for which accuracy_threshold sums the exact tail; above it
/// the normal approximation is used.
inline constexpr std::uint64_t kExactTailLimit = 100000;

/// Smallest accuracy k / n_test whose chance of being reached or beaten,
/// P(X >= k | n_test, p), is below alpha.
double accuracy_threshold(std::uint64_t n_test, double p, double alpha);

}  // namespace netanom
