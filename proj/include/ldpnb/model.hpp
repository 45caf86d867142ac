#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "ldpnb/continuous.hpp"
#include "ldpnb/data.hpp"
#include "ldpnb/encoding.hpp"
#include "ldpnb/errors.hpp"
#include "ldpnb/freq.hpp"
#include "ldpnb/linalg.hpp"

namespace ldpnb {

// Conditional probability table of one categorical feature: probs(a-1, j) is
// P(feature = a | class = j+1), columns sum to 1. unseen[j] is the
// probability charged to a category index outside [1, cardinality], equal to
// one clamped count over that class's total.
struct DiscreteFeatureParams {
  int cardinality = 0;
  Matrix probs;                // cardinality x k
  std::vector<double> unseen;  // length k
};

struct GaussianFeatureParams {
  std::vector<double> mu;      // length k
  std::vector<double> sigma2;  // length k, >= kVarianceFloor
};

using FeatureParams = std::variant<DiscreteFeatureParams, GaussianFeatureParams>;

struct NaiveBayesModel {
  std::vector<double> priors;  // length k, positive, sums to 1
  std::vector<FeatureParams> features;

  int class_count() const { return static_cast<int>(priors.size()); }
};

struct Prediction {
  int label = 0;  // 1-based; ties break toward the lowest class index
  std::vector<double> log_scores;
};

namespace detail {

inline void validate_priors(std::span<const double> priors) {
  if (priors.size() < 2) throw InvalidInputError("model needs at least two classes");
  double sum = 0.0;
  for (double p : priors) {
    if (!(p > 0.0)) throw DegenerateDataError("class priors must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidInputError("class priors must sum to 1");
}

}  // namespace detail

// Builds the discrete model from clamped estimated counts: one estimate for
// the class-label domain and one joint feature-class estimate per feature.
inline NaiveBayesModel assemble_discrete(const FrequencyEstimate& class_estimate,
                                         std::span<const FrequencyEstimate> joint_estimates,
                                         std::span<const int> cardinalities) {
  const int k = static_cast<int>(class_estimate.counts.size());
  if (k < 2) throw InvalidInputError("class estimate must cover at least two classes");
  if (joint_estimates.size() != cardinalities.size()) {
    throw InvalidInputError("need exactly one joint estimate per feature");
  }

  NaiveBayesModel model;
  double total = 0.0;
  for (double c : class_estimate.counts) {
    if (!(c > 0.0)) throw InvalidInputError("class estimate must be clamped positive before assembly");
    total += c;
  }
  model.priors.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) model.priors[static_cast<std::size_t>(j)] = class_estimate.counts[static_cast<std::size_t>(j)] / total;

  model.features.reserve(joint_estimates.size());
  for (std::size_t f = 0; f < joint_estimates.size(); ++f) {
    const int card = cardinalities[f];
    const JointDomain dom{card, k};
    validate_joint_domain(dom);
    const auto& counts = joint_estimates[f].counts;
    if (counts.size() != static_cast<std::size_t>(dom.size())) {
      throw InvalidInputError("joint estimate length does not match cardinality * class_count");
    }

    DiscreteFeatureParams params;
    params.cardinality = card;
    params.probs = Matrix(static_cast<std::size_t>(card), static_cast<std::size_t>(k));
    params.unseen.resize(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
      double denom = 0.0;
      for (int a = 1; a <= card; ++a) {
        const double c = counts[static_cast<std::size_t>(encode_joint(a, j, dom) - 1)];
        if (!(c > 0.0)) throw InvalidInputError("joint estimate must be clamped positive before assembly");
        denom += c;
      }
      for (int a = 1; a <= card; ++a) {
        params.probs(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(j - 1)) =
            counts[static_cast<std::size_t>(encode_joint(a, j, dom) - 1)] / denom;
      }
      params.unseen[static_cast<std::size_t>(j - 1)] = 1.0 / denom;
    }
    model.features.emplace_back(std::move(params));
  }
  return model;
}

// Builds the Gaussian model from estimated priors and per-feature per-class
// moments.
inline NaiveBayesModel assemble_gaussian(std::span<const double> priors,
                                         std::span<const std::vector<ClassMoments>> feature_moments) {
  detail::validate_priors(priors);
  NaiveBayesModel model;
  model.priors.assign(priors.begin(), priors.end());
  model.features.reserve(feature_moments.size());
  for (const auto& moments : feature_moments) {
    if (moments.size() != priors.size()) throw InvalidInputError("moments must cover every class");
    GaussianFeatureParams params;
    params.mu.reserve(moments.size());
    params.sigma2.reserve(moments.size());
    for (const auto& m : moments) {
      if (!(m.sigma2 >= kVarianceFloor)) throw InvalidInputError("variance below the floor");
      params.mu.push_back(m.mu);
      params.sigma2.push_back(m.sigma2);
    }
    model.features.emplace_back(std::move(params));
  }
  return model;
}

// Log-space scores: log P(C_j) + sum_i log P(x_i | C_j); argmax wins, ties go
// to the lowest class index.
inline Prediction predict(const NaiveBayesModel& model, std::span<const double> x) {
  if (x.size() != model.features.size()) throw SchemaError("instance width does not match the model");
  const int k = model.class_count();

  Prediction out;
  out.log_scores.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) out.log_scores[static_cast<std::size_t>(j)] = std::log(model.priors[static_cast<std::size_t>(j)]);

  for (std::size_t f = 0; f < model.features.size(); ++f) {
    if (const auto* d = std::get_if<DiscreteFeatureParams>(&model.features[f])) {
      const int a = static_cast<int>(x[f]);
      const bool seen = a >= 1 && a <= d->cardinality;
      for (int j = 0; j < k; ++j) {
        const double p = seen ? d->probs(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(j))
                              : d->unseen[static_cast<std::size_t>(j)];
        out.log_scores[static_cast<std::size_t>(j)] += std::log(p);
      }
    } else {
      const auto& g = std::get<GaussianFeatureParams>(model.features[f]);
      for (int j = 0; j < k; ++j) {
        const double mu = g.mu[static_cast<std::size_t>(j)];
        const double s2 = g.sigma2[static_cast<std::size_t>(j)];
        const double diff = x[f] - mu;
        out.log_scores[static_cast<std::size_t>(j)] +=
            -0.5 * std::log(2.0 * 3.14159265358979323846 * s2) - diff * diff / (2.0 * s2);
      }
    }
  }

  out.label = 1;
  for (int j = 1; j < k; ++j) {
    if (out.log_scores[static_cast<std::size_t>(j)] > out.log_scores[static_cast<std::size_t>(out.label - 1)]) {
      out.label = j + 1;
    }
  }
  return out;
}

// Exact empirical fit without perturbation, using the same clamping and
// variance-floor policies as the private path: zero counts become one count,
// variances rise to the floor. The comparison baseline for every experiment.
inline NaiveBayesModel reference_fit(std::span<const Record> train, const DatasetSchema& schema) {
  if (train.empty()) throw EmptyInputError("reference fit needs training records");
  const int k = schema.class_count();
  if (k < 2) throw InvalidInputError("schema needs at least two classes");

  std::vector<double> class_counts(static_cast<std::size_t>(k), 0.0);
  for (const auto& r : train) {
    if (r.x.size() != schema.feature_count()) throw SchemaError("record width does not match schema");
    if (r.label < 1 || r.label > k) throw SchemaError("record label outside [1, k]");
    class_counts[static_cast<std::size_t>(r.label - 1)] += 1.0;
  }

  NaiveBayesModel model;
  FrequencyEstimate class_est{class_counts, train.size()};
  class_est = clamp_estimates(std::move(class_est));
  double total = 0.0;
  for (double c : class_est.counts) total += c;
  model.priors.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) model.priors[static_cast<std::size_t>(j)] = class_est.counts[static_cast<std::size_t>(j)] / total;

  for (std::size_t f = 0; f < schema.feature_count(); ++f) {
    const Column& col = schema.features[f];
    if (col.kind == ColumnKind::kCategorical) {
      const int card = col.cardinality();
      if (card < 1) throw SchemaError("categorical column '" + col.name + "' has no categories");
      const JointDomain dom{card, k};
      FrequencyEstimate joint{std::vector<double>(static_cast<std::size_t>(dom.size()), 0.0), train.size()};
      for (const auto& r : train) {
        const int a = r.category(f);
        if (a < 1 || a > card) throw SchemaError("training record holds a category outside the schema");
        joint.counts[static_cast<std::size_t>(encode_joint(a, r.label, dom) - 1)] += 1.0;
      }
      joint = clamp_estimates(std::move(joint));

      DiscreteFeatureParams params;
      params.cardinality = card;
      params.probs = Matrix(static_cast<std::size_t>(card), static_cast<std::size_t>(k));
      params.unseen.resize(static_cast<std::size_t>(k));
      for (int j = 1; j <= k; ++j) {
        double denom = 0.0;
        for (int a = 1; a <= card; ++a) denom += joint.counts[static_cast<std::size_t>(encode_joint(a, j, dom) - 1)];
        for (int a = 1; a <= card; ++a) {
          params.probs(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(j - 1)) =
              joint.counts[static_cast<std::size_t>(encode_joint(a, j, dom) - 1)] / denom;
        }
        params.unseen[static_cast<std::size_t>(j - 1)] = 1.0 / denom;
      }
      model.features.emplace_back(std::move(params));
    } else {
      GaussianFeatureParams params;
      params.mu.assign(static_cast<std::size_t>(k), 0.0);
      params.sigma2.assign(static_cast<std::size_t>(k), kVarianceFloor);
      std::vector<double> sums(static_cast<std::size_t>(k), 0.0), squares(static_cast<std::size_t>(k), 0.0);
      std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
      for (const auto& r : train) {
        const std::size_t j = static_cast<std::size_t>(r.label - 1);
        sums[j] += r.x[f];
        squares[j] += r.x[f] * r.x[f];
        counts[j] += 1;
      }
      for (int j = 0; j < k; ++j) {
        const std::size_t jj = static_cast<std::size_t>(j);
        if (counts[jj] == 0) continue;  // class absent from the split: flat density
        const double mu = sums[jj] / static_cast<double>(counts[jj]);
        const double mu_s = squares[jj] / static_cast<double>(counts[jj]);
        params.mu[jj] = mu;
        params.sigma2[jj] = std::max(mu_s - mu * mu, kVarianceFloor);
      }
      model.features.emplace_back(std::move(params));
    }
  }
  return model;
}

}  // namespace ldpnb
