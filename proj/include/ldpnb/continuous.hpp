#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "ldpnb/errors.hpp"
#include "ldpnb/freq.hpp"
#include "ldpnb/random.hpp"

namespace ldpnb {

// Perturbation for bounded numeric values, normalized to [-1, 1] upstream.
// Three report shapes exist: a noisy scalar, a one-bit report for one
// uniformly chosen coordinate, and a class-masked vector that hides which
// class slot carries the payload.

inline constexpr double kVarianceFloor = 1e-4;

struct OneBitReport {
  int feature = 0;  // 1-based coordinate the individual reported
  int sign = 1;     // +1 or -1
};

using MaskedVector = std::vector<double>;
using NumericReport = std::variant<double, OneBitReport, MaskedVector>;

inline void validate_unit_interval(double v) {
  if (!(v >= -1.0 && v <= 1.0)) throw InvalidInputError("value must lie in [-1, 1]");
}

// v + Lap(2 * scale_multiplier / eps). The multiplier is n when an individual
// reports all n coordinates of a vector, so the whole vector still satisfies
// the eps budget by composition.
inline double laplace_perturb(double v, double epsilon, double scale_multiplier, Rng& rng) {
  validate_unit_interval(v);
  validate_epsilon(epsilon);
  if (!(scale_multiplier >= 1.0)) throw InvalidInputError("scale multiplier must be >= 1");
  return v + sample_laplace(rng, 2.0 * scale_multiplier / epsilon);
}

// Chance that the one-bit mechanism emits +1 for coordinate value v.
inline double onebit_up_probability(double v, double epsilon) {
  validate_unit_interval(v);
  validate_epsilon(epsilon);
  const double e = std::exp(epsilon);
  return (v * (e - 1.0) + e + 1.0) / (2.0 * e + 2.0);
}

// Magnitude of the value the aggregator attributes to the selected
// coordinate of an n-dimensional input.
inline double onebit_magnitude(double epsilon, std::size_t n) {
  validate_epsilon(epsilon);
  if (n == 0) throw InvalidInputError("dimension must be positive");
  const double e = std::exp(epsilon);
  return (e + 1.0) / (e - 1.0) * static_cast<double>(n);
}

// One individual's report: pick one coordinate uniformly, flip a biased coin,
// transmit only (coordinate, sign).
inline OneBitReport onebit_perturb(std::span<const double> v, double epsilon, Rng& rng) {
  if (v.empty()) throw EmptyInputError("onebit_perturb: empty input vector");
  const std::size_t j = static_cast<std::size_t>(uniform_index(rng, v.size()));
  const bool up = sample_bernoulli(rng, onebit_up_probability(v[j], epsilon));
  return {static_cast<int>(j) + 1, up ? 1 : -1};
}

// Per-coordinate means from one-bit reports over n-dimensional inputs.
// Each report contributes sign * magnitude to its coordinate; dividing the
// coordinate sum by n * (reports that picked it) uses realized selection
// counts instead of the expected m/n, and keeps the estimator unbiased.
// Coordinates nobody picked come back as 0.
inline std::vector<double> estimate_means_onebit(std::span<const OneBitReport> reports,
                                                 std::size_t n, double epsilon) {
  if (reports.empty()) throw EmptyInputError("estimate_means_onebit: no reports");
  if (n == 0) throw InvalidInputError("dimension must be positive");
  const double magnitude = onebit_magnitude(epsilon, n);
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> picked(n, 0);
  for (const auto& r : reports) {
    if (r.feature < 1 || static_cast<std::size_t>(r.feature) > n) {
      throw InconsistentReportsError("one-bit report names a coordinate outside [1, n]");
    }
    if (r.sign != 1 && r.sign != -1) throw InconsistentReportsError("one-bit sign must be +1 or -1");
    sums[static_cast<std::size_t>(r.feature - 1)] += r.sign * magnitude;
    picked[static_cast<std::size_t>(r.feature - 1)] += 1;
  }
  std::vector<double> means(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (picked[j] > 0) means[j] = sums[j] / (static_cast<double>(n) * static_cast<double>(picked[j]));
  }
  return means;
}

// Which moment a masked report carries.
enum class MomentTarget { kValue, kSquaredValue };

// Pre-noise masked vector: the payload sits in the slot of the individual's
// class, all other slots are zero. For the squared-value target the payload
// is v^2. L1 distance between any two such vectors is at most 2, which is
// what justifies Laplace(2/eps) noise per slot.
inline MaskedVector build_masked_vector(double v, MomentTarget target, int class_index, int class_count) {
  validate_unit_interval(v);
  if (class_count < 2) throw InvalidInputError("class count must be at least 2");
  if (class_index < 1 || class_index > class_count) throw InvalidInputError("class index out of [1, k]");
  MaskedVector m(static_cast<std::size_t>(class_count), 0.0);
  m[static_cast<std::size_t>(class_index - 1)] = target == MomentTarget::kValue ? v : v * v;
  return m;
}

inline MaskedVector masked_vector_perturb(double v, MomentTarget target, int class_index,
                                          int class_count, double epsilon, Rng& rng,
                                          double scale_multiplier = 1.0) {
  validate_epsilon(epsilon);
  if (!(scale_multiplier >= 1.0)) throw InvalidInputError("scale multiplier must be >= 1");
  MaskedVector m = build_masked_vector(v, target, class_index, class_count);
  const double scale = 2.0 * scale_multiplier / epsilon;
  for (double& slot : m) slot += sample_laplace(rng, scale);
  return m;
}

inline double estimate_mean(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("estimate_mean: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

struct ClassMoments {
  double mu = 0.0;       // E[v | class]
  double mu_s = 0.0;     // E[v^2 | class]
  double sigma2 = 0.0;   // mu_s - mu^2, floored at kVarianceFloor
};

// Recovers per-class moments of one feature from two masked report groups.
// The observed slot-j mean estimates P(C_j) * E[payload | C_j], so each slot
// mean is divided by the class prior.
inline std::vector<ClassMoments> estimate_class_moments(std::span<const MaskedVector> value_reports,
                                                        std::span<const MaskedVector> square_reports,
                                                        std::span<const double> class_priors) {
  if (value_reports.empty() || square_reports.empty()) {
    throw EmptyInputError("estimate_class_moments: a report group is empty");
  }
  const std::size_t k = class_priors.size();
  if (k < 2) throw InvalidInputError("need at least two classes");
  double prior_sum = 0.0;
  for (double p : class_priors) {
    if (!(p > 0.0)) throw DegenerateDataError("class prior must be positive");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9) throw InvalidInputError("class priors must sum to 1");

  auto slot_means = [k](std::span<const MaskedVector> reports) {
    std::vector<double> sums(k, 0.0);
    for (const auto& r : reports) {
      if (r.size() != k) throw InconsistentReportsError("masked vector has the wrong length");
      for (std::size_t j = 0; j < k; ++j) sums[j] += r[j];
    }
    for (double& s : sums) s /= static_cast<double>(reports.size());
    return sums;
  };

  const std::vector<double> value_means = slot_means(value_reports);
  const std::vector<double> square_means = slot_means(square_reports);

  std::vector<ClassMoments> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    out[j].mu = value_means[j] / class_priors[j];
    out[j].mu_s = square_means[j] / class_priors[j];
    out[j].sigma2 = std::max(out[j].mu_s - out[j].mu * out[j].mu, kVarianceFloor);
  }
  return out;
}

}  // namespace ldpnb
