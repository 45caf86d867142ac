#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ldpnb/errors.hpp"
#include "ldpnb/random.hpp"

namespace ldpnb {

// Single-round frequency oracles over a categorical domain {1, ..., d}.
// Each individual perturbs one value locally; the aggregator turns the
// collected reports into unbiased estimated counts per value.
enum class MechanismKind {
  DE,   // direct encoding (generalized randomized response)
  SUE,  // symmetric unary encoding (one bit per value, symmetric flips)
  OUE,  // optimized unary encoding (asymmetric flips)
  SHE,  // summation with histogram encoding (Laplace noise, sum aggregation)
  THE,  // thresholding with histogram encoding (Laplace noise, threshold, debias)
};

inline const char* mechanism_name(MechanismKind k) {
  switch (k) {
    case MechanismKind::DE: return "DE";
    case MechanismKind::SUE: return "SUE";
    case MechanismKind::OUE: return "OUE";
    case MechanismKind::SHE: return "SHE";
    case MechanismKind::THE: return "THE";
  }
  return "?";
}

struct PrivacyParams {
  double epsilon = 1.0;
  double theta = 0.25;  // THE threshold; ignored by the other mechanisms
};

inline void validate_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInputError("epsilon must be positive and finite");
  }
}

inline void validate_domain(int d) {
  if (d < 2) throw InvalidInputError("domain size must be at least 2");
}

// Probability of reporting the held value faithfully (p) and of any other
// fixed outcome (q). The estimator below depends only on this pair.
struct PerturbProbs {
  double p = 1.0;
  double q = 0.0;
};

inline PerturbProbs de_probs(double epsilon, int d) {
  validate_epsilon(epsilon);
  validate_domain(d);
  const double e = std::exp(epsilon);
  return {e / (e + d - 1.0), 1.0 / (e + d - 1.0)};
}

inline PerturbProbs sue_probs(double epsilon) {
  validate_epsilon(epsilon);
  const double eh = std::exp(epsilon / 2.0);
  return {eh / (eh + 1.0), 1.0 / (eh + 1.0)};
}

inline PerturbProbs oue_probs(double epsilon) {
  validate_epsilon(epsilon);
  return {0.5, 1.0 / (std::exp(epsilon) + 1.0)};
}

// THE reports a Laplace-noised one-hot vector; the aggregator marks components
// above theta. p is the chance the held component survives the threshold,
// q the chance a zero component crosses it. Both follow from the Laplace CDF:
//   p = Pr[1 + Lap(2/eps) > theta] = 1 - exp(-(eps/2) * (1 - theta)) / 2
//   q = Pr[0 + Lap(2/eps) > theta] =     exp(-(eps/2) * theta)       / 2
inline PerturbProbs the_probs(double epsilon, double theta) {
  validate_epsilon(epsilon);
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidInputError("THE threshold must lie in (0, 1)");
  return {1.0 - 0.5 * std::exp(-(epsilon / 2.0) * (1.0 - theta)),
          0.5 * std::exp(-(epsilon / 2.0) * theta)};
}

// One individual's perturbed contribution: a category index (DE), a bit
// vector (SUE/OUE), or a real vector (SHE/THE before thresholding).
struct CategoricalReport {
  std::variant<int, std::vector<std::uint8_t>, std::vector<double>> value;

  static CategoricalReport index(int v) { return {v}; }
  static CategoricalReport bits(std::vector<std::uint8_t> b) { return {std::move(b)}; }
  static CategoricalReport reals(std::vector<double> r) { return {std::move(r)}; }
};

inline void validate_value(int v, int d) {
  if (v < 1 || v > d) throw InvalidInputError("value out of domain [1, d]");
}

// DE: report the true value with probability p, otherwise one of the d-1
// other values uniformly.
inline CategoricalReport de_perturb(int v, int d, double epsilon, Rng& rng) {
  validate_value(v, d);
  const PerturbProbs pq = de_probs(epsilon, d);
  if (sample_bernoulli(rng, pq.p)) return CategoricalReport::index(v);
  int other = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(d - 1)));
  if (other >= v) ++other;
  return CategoricalReport::index(other);
}

// SUE/OUE: one-hot encode, then keep the held bit with probability p and turn
// each zero bit on with probability q, independently per position.
inline CategoricalReport ue_perturb(int v, int d, MechanismKind kind, double epsilon, Rng& rng) {
  validate_value(v, d);
  if (kind != MechanismKind::SUE && kind != MechanismKind::OUE) {
    throw InvalidInputError("ue_perturb expects SUE or OUE");
  }
  const PerturbProbs pq = kind == MechanismKind::SUE ? sue_probs(epsilon) : oue_probs(epsilon);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const double keep = (i == v - 1) ? pq.p : pq.q;
    bits[static_cast<std::size_t>(i)] = sample_bernoulli(rng, keep) ? 1 : 0;
  }
  return CategoricalReport::bits(std::move(bits));
}

// SHE/THE share this encoding: one-hot plus iid Laplace(2/eps) per component.
inline CategoricalReport he_perturb(int v, int d, double epsilon, Rng& rng) {
  validate_value(v, d);
  validate_epsilon(epsilon);
  validate_domain(d);
  const double scale = 2.0 / epsilon;
  std::vector<double> reals(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    reals[static_cast<std::size_t>(i)] = (i == v - 1 ? 1.0 : 0.0) + sample_laplace(rng, scale);
  }
  return CategoricalReport::reals(std::move(reals));
}

// Estimated counts per domain value from m reports. Entries may be negative
// or non-integral; clamping is a separate, later step.
struct FrequencyEstimate {
  std::vector<double> counts;
  std::size_t m = 0;
};

// Unbiased debiasing shared by DE/SUE/OUE/THE: observed support counts c_i
// become (c_i - m*q) / (p - q).
inline std::vector<double> debias_counts(std::span<const double> observed, std::size_t m, PerturbProbs pq) {
  if (!(pq.p > pq.q)) throw InvalidInputError("debias_counts requires p > q");
  std::vector<double> out(observed.size());
  const double mq = static_cast<double>(m) * pq.q;
  const double denom = pq.p - pq.q;
  for (std::size_t i = 0; i < observed.size(); ++i) out[i] = (observed[i] - mq) / denom;
  return out;
}

// Immutable encode/perturb/aggregate triple for one (mechanism, domain, eps).
class FrequencyMechanism {
 public:
  FrequencyMechanism(MechanismKind kind, PrivacyParams params, int domain)
      : kind_(kind), params_(params), d_(domain) {
    validate_epsilon(params_.epsilon);
    validate_domain(d_);
    if (kind_ == MechanismKind::THE && !(params_.theta > 0.0 && params_.theta < 1.0)) {
      throw InvalidInputError("THE threshold must lie in (0, 1)");
    }
  }

  MechanismKind kind() const { return kind_; }
  int domain() const { return d_; }
  const PrivacyParams& params() const { return params_; }

  // (p, q) for the mechanisms that debias; SHE aggregates by summation and
  // has no such pair.
  PerturbProbs probs() const {
    switch (kind_) {
      case MechanismKind::DE: return de_probs(params_.epsilon, d_);
      case MechanismKind::SUE: return sue_probs(params_.epsilon);
      case MechanismKind::OUE: return oue_probs(params_.epsilon);
      case MechanismKind::THE: return the_probs(params_.epsilon, params_.theta);
      case MechanismKind::SHE: throw InvalidInputError("SHE has no keep/flip probability pair");
    }
    throw InvalidInputError("unknown mechanism");
  }

  CategoricalReport perturb(int v, Rng& rng) const {
    switch (kind_) {
      case MechanismKind::DE: return de_perturb(v, d_, params_.epsilon, rng);
      case MechanismKind::SUE:
      case MechanismKind::OUE: return ue_perturb(v, d_, kind_, params_.epsilon, rng);
      case MechanismKind::SHE:
      case MechanismKind::THE: return he_perturb(v, d_, params_.epsilon, rng);
    }
    throw InvalidInputError("unknown mechanism");
  }

  FrequencyEstimate aggregate(std::span<const CategoricalReport> reports) const {
    if (reports.empty()) throw EmptyInputError("aggregate: no reports");
    const std::size_t d = static_cast<std::size_t>(d_);
    const std::size_t m = reports.size();
    std::vector<double> observed(d, 0.0);

    switch (kind_) {
      case MechanismKind::DE: {
        for (const auto& r : reports) {
          const int* v = std::get_if<int>(&r.value);
          if (v == nullptr) throw InconsistentReportsError("DE aggregate saw a non-index report");
          if (*v < 1 || *v > d_) throw InconsistentReportsError("DE report outside the domain");
          observed[static_cast<std::size_t>(*v - 1)] += 1.0;
        }
        return {debias_counts(observed, m, probs()), m};
      }
      case MechanismKind::SUE:
      case MechanismKind::OUE: {
        for (const auto& r : reports) {
          const auto* bits = std::get_if<std::vector<std::uint8_t>>(&r.value);
          if (bits == nullptr) throw InconsistentReportsError("unary aggregate saw a non-bit report");
          if (bits->size() != d) throw InconsistentReportsError("bit report has the wrong length");
          for (std::size_t i = 0; i < d; ++i) observed[i] += (*bits)[i] ? 1.0 : 0.0;
        }
        return {debias_counts(observed, m, probs()), m};
      }
      case MechanismKind::SHE: {
        for (const auto& r : reports) {
          const auto* reals = std::get_if<std::vector<double>>(&r.value);
          if (reals == nullptr) throw InconsistentReportsError("SHE aggregate saw a non-real report");
          if (reals->size() != d) throw InconsistentReportsError("real report has the wrong length");
          for (std::size_t i = 0; i < d; ++i) observed[i] += (*reals)[i];
        }
        return {std::move(observed), m};  // noise is zero-mean, sums are already unbiased
      }
      case MechanismKind::THE: {
        for (const auto& r : reports) {
          const auto* reals = std::get_if<std::vector<double>>(&r.value);
          if (reals == nullptr) throw InconsistentReportsError("THE aggregate saw a non-real report");
          if (reals->size() != d) throw InconsistentReportsError("real report has the wrong length");
          for (std::size_t i = 0; i < d; ++i) observed[i] += (*reals)[i] > params_.theta ? 1.0 : 0.0;
        }
        return {debias_counts(observed, m, probs()), m};
      }
    }
    throw InvalidInputError("unknown mechanism");
  }

 private:
  MechanismKind kind_;
  PrivacyParams params_;
  int d_;
};

}  // namespace ldpnb
