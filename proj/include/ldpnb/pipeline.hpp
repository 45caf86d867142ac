#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ldpnb/continuous.hpp"
#include "ldpnb/data.hpp"
#include "ldpnb/dimred.hpp"
#include "ldpnb/encoding.hpp"
#include "ldpnb/errors.hpp"
#include "ldpnb/freq.hpp"
#include "ldpnb/model.hpp"
#include "ldpnb/random.hpp"

namespace ldpnb {

// Every individual submits exactly one report, carrying the full epsilon.
// A run therefore partitions the training individuals across report targets
// (class label, joint feature-class domains, or moment groups).
enum class AssignmentStrategy { kRoundRobin, kUniformRandom };

struct ReportAssignment {
  std::vector<int> target_of;           // length m, values in [0, targets)
  std::vector<std::size_t> group_sizes;  // length targets
  bool undersized = false;               // m < targets: some group is empty
};

inline ReportAssignment assign_reports(std::size_t m, std::size_t targets,
                                       AssignmentStrategy strategy, Rng& rng) {
  if (targets == 0) throw InvalidInputError("need at least one report target");
  if (m == 0) throw EmptyInputError("no individuals to assign");
  ReportAssignment out;
  out.target_of.resize(m);
  out.group_sizes.assign(targets, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t t = strategy == AssignmentStrategy::kRoundRobin
                              ? i % targets
                              : static_cast<std::size_t>(uniform_index(rng, targets));
    out.target_of[i] = static_cast<int>(t);
    out.group_sizes[t] += 1;
  }
  out.undersized = m < targets;
  return out;
}

struct RunDiagnostics {
  std::size_t individuals = 0;
  std::size_t reports = 0;  // equals individuals: one report each
  std::vector<std::size_t> group_sizes;
  std::vector<std::string> warnings;
};

struct DiscreteRunOptions {
  PrivacyParams privacy;
  MechanismKind mechanism = MechanismKind::DE;
  AssignmentStrategy assignment = AssignmentStrategy::kRoundRobin;
};

// Trains a discrete naive Bayes model from one locally perturbed report per
// training individual: one report group estimates the class histogram, and
// one group per feature estimates the joint feature-class histogram.
inline NaiveBayesModel run_discrete(std::span<const Record> train, const DatasetSchema& schema,
                                    const DiscreteRunOptions& options, Rng& rng,
                                    RunDiagnostics* diagnostics = nullptr) {
  if (train.empty()) throw EmptyInputError("no training records");
  if (!schema.all_categorical()) throw SchemaError("discrete run requires categorical features only");
  const int k = schema.class_count();
  const std::size_t n = schema.feature_count();

  std::vector<int> cardinalities(n);
  std::vector<FrequencyMechanism> mechanisms;
  mechanisms.reserve(n + 1);
  mechanisms.emplace_back(options.mechanism, options.privacy, k);
  for (std::size_t f = 0; f < n; ++f) {
    cardinalities[f] = schema.features[f].cardinality();
    const JointDomain dom{cardinalities[f], k};
    validate_joint_domain(dom);
    mechanisms.emplace_back(options.mechanism, options.privacy, dom.size());
  }

  const ReportAssignment assignment = assign_reports(train.size(), n + 1, options.assignment, rng);
  std::vector<std::vector<CategoricalReport>> groups(n + 1);
  for (std::size_t t = 0; t <= n; ++t) groups[t].reserve(assignment.group_sizes[t]);

  for (std::size_t i = 0; i < train.size(); ++i) {
    const Record& r = train[i];
    if (r.x.size() != n) throw SchemaError("record width does not match schema");
    if (r.label < 1 || r.label > k) throw SchemaError("record label outside [1, k]");
    for (std::size_t f = 0; f < n; ++f) {
      const int a = r.category(f);
      if (a < 1 || a > cardinalities[f]) throw SchemaError("record holds a category outside the schema");
    }
    const std::size_t t = static_cast<std::size_t>(assignment.target_of[i]);
    int value;
    if (t == 0) {
      value = r.label;
    } else {
      const std::size_t f = t - 1;
      value = encode_joint(r.category(f), r.label, {cardinalities[f], k});
    }
    groups[t].push_back(mechanisms[t].perturb(value, rng));
  }

  auto estimate_group = [&](std::size_t t) {
    if (groups[t].empty()) {
      // Nothing reported for this target; clamping turns the zeros into a
      // flat table downstream.
      return FrequencyEstimate{std::vector<double>(static_cast<std::size_t>(mechanisms[t].domain()), 0.0), 0};
    }
    return mechanisms[t].aggregate(groups[t]);
  };

  const FrequencyEstimate class_estimate = clamp_estimates(estimate_group(0));
  std::vector<FrequencyEstimate> joint_estimates;
  joint_estimates.reserve(n);
  for (std::size_t f = 0; f < n; ++f) joint_estimates.push_back(clamp_estimates(estimate_group(f + 1)));

  if (diagnostics != nullptr) {
    diagnostics->individuals = train.size();
    diagnostics->reports = train.size();
    diagnostics->group_sizes = assignment.group_sizes;
    if (assignment.undersized) diagnostics->warnings.push_back("fewer individuals than report targets");
  }
  return assemble_discrete(class_estimate, joint_estimates, cardinalities);
}

struct GaussianRunOptions {
  PrivacyParams privacy;
  // Mechanism for the dedicated class-label report group.
  MechanismKind class_mechanism = MechanismKind::DE;
  // 1: every individual reports all features with noise scaled by n.
  // 2: one uniformly chosen feature as a one-bit report (labels visible).
  // 3: one assigned (feature, moment) group per individual.
  int approach = 3;
  // Hide class membership inside masked vectors. With visible labels the
  // label accompanies the noisy value in the clear.
  bool hide_labels = true;
  AssignmentStrategy assignment = AssignmentStrategy::kRoundRobin;
};

namespace detail {

struct LabeledScalar {
  int label;
  double value;
};

struct LabeledVector {
  int label;
  std::vector<double> values;
};

struct LabeledOneBit {
  int label;
  OneBitReport report;
};

// Per-class means of visible-label noisy scalars; classes nobody in the
// group carried fall back to 0.
inline std::vector<double> class_means(std::span<const LabeledScalar> reports, int k,
                                       std::vector<std::string>* warnings, const char* what) {
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (const auto& r : reports) {
    sums[static_cast<std::size_t>(r.label - 1)] += r.value;
    counts[static_cast<std::size_t>(r.label - 1)] += 1;
  }
  std::vector<double> means(static_cast<std::size_t>(k), 0.0);
  for (int j = 0; j < k; ++j) {
    const std::size_t jj = static_cast<std::size_t>(j);
    if (counts[jj] > 0) {
      means[jj] = sums[jj] / static_cast<double>(counts[jj]);
    } else if (warnings != nullptr) {
      warnings->push_back(std::string(what) + ": a class is absent from a report group");
    }
  }
  return means;
}

}  // namespace detail

// Trains a Gaussian naive Bayes model under the one-report rule: a dedicated
// group estimates class priors with the configured frequency mechanism, and
// the remaining individuals feed per-class mean and mean-of-squares
// estimates, either through class-masked vectors (hidden labels) or noisy
// values with the label in the clear.
inline NaiveBayesModel run_gaussian(std::span<const Record> train, const DatasetSchema& schema,
                                    const GaussianRunOptions& options, Rng& rng,
                                    RunDiagnostics* diagnostics = nullptr) {
  if (train.empty()) throw EmptyInputError("no training records");
  if (!schema.all_continuous()) throw SchemaError("gaussian run requires continuous features only");
  if (options.approach < 1 || options.approach > 3) throw InvalidInputError("approach must be 1, 2, or 3");
  const int k = schema.class_count();
  const std::size_t n = schema.feature_count();
  if (n == 0) throw SchemaError("gaussian run needs at least one feature");
  const double eps = options.privacy.epsilon;
  validate_epsilon(eps);

  // Approach 2 with hidden labels has no one-bit form; it degrades to the
  // per-(feature, moment) masked grouping.
  const int approach = options.hide_labels && options.approach == 2 ? 3 : options.approach;
  const bool bundled = approach == 1;  // all features in one report
  const bool onebit = approach == 2 && !options.hide_labels;
  const std::size_t moment_targets = (bundled || onebit) ? 2 : 2 * n;
  const std::size_t targets = 1 + moment_targets;

  FrequencyMechanism class_mechanism(options.class_mechanism, options.privacy, k);
  const ReportAssignment assignment = assign_reports(train.size(), targets, options.assignment, rng);

  std::vector<CategoricalReport> class_group;
  class_group.reserve(assignment.group_sizes[0]);

  // Hidden labels: masked vectors per (feature, moment). Visible labels:
  // labeled scalars per (feature, moment), or labeled one-bit reports.
  std::vector<std::vector<MaskedVector>> masked_values(n), masked_squares(n);
  std::vector<std::vector<detail::LabeledScalar>> scalar_values(n), scalar_squares(n);
  std::vector<detail::LabeledOneBit> onebit_values, onebit_squares;

  auto target_slot = [&](std::size_t t) -> std::pair<MomentTarget, std::size_t> {
    // t >= 1. Bundled/one-bit runs use two moment groups; otherwise the
    // first n are value groups, the next n squared-value groups.
    if (bundled || onebit) return {t == 1 ? MomentTarget::kValue : MomentTarget::kSquaredValue, 0};
    const std::size_t idx = t - 1;
    return idx < n ? std::pair{MomentTarget::kValue, idx} : std::pair{MomentTarget::kSquaredValue, idx - n};
  };

  for (std::size_t i = 0; i < train.size(); ++i) {
    const Record& r = train[i];
    if (r.x.size() != n) throw SchemaError("record width does not match schema");
    if (r.label < 1 || r.label > k) throw SchemaError("record label outside [1, k]");
    const std::size_t t = static_cast<std::size_t>(assignment.target_of[i]);
    if (t == 0) {
      class_group.push_back(class_mechanism.perturb(r.label, rng));
      continue;
    }
    const auto [moment, f] = target_slot(t);
    if (options.hide_labels) {
      if (bundled) {
        // One report bundling all n features, each slot noised at scale
        // 2n/eps so the bundle spends eps in total.
        for (std::size_t ff = 0; ff < n; ++ff) {
          auto& sink = moment == MomentTarget::kValue ? masked_values[ff] : masked_squares[ff];
          sink.push_back(masked_vector_perturb(r.x[ff], moment, r.label, k, eps, rng,
                                               static_cast<double>(n)));
        }
      } else {
        auto& sink = moment == MomentTarget::kValue ? masked_values[f] : masked_squares[f];
        sink.push_back(masked_vector_perturb(r.x[f], moment, r.label, k, eps, rng));
      }
    } else if (onebit) {
      std::vector<double> payload(n);
      for (std::size_t ff = 0; ff < n; ++ff) {
        payload[ff] = moment == MomentTarget::kValue ? r.x[ff] : r.x[ff] * r.x[ff];
      }
      auto& sink = moment == MomentTarget::kValue ? onebit_values : onebit_squares;
      sink.push_back({r.label, onebit_perturb(payload, eps, rng)});
    } else if (bundled) {
      detail::LabeledVector row{r.label, std::vector<double>(n)};
      for (std::size_t ff = 0; ff < n; ++ff) {
        const double payload = moment == MomentTarget::kValue ? r.x[ff] : r.x[ff] * r.x[ff];
        row.values[ff] = laplace_perturb(payload, eps, static_cast<double>(n), rng);
      }
      for (std::size_t ff = 0; ff < n; ++ff) {
        auto& sink = moment == MomentTarget::kValue ? scalar_values[ff] : scalar_squares[ff];
        sink.push_back({row.label, row.values[ff]});
      }
    } else {
      const double payload = moment == MomentTarget::kValue ? r.x[f] : r.x[f] * r.x[f];
      auto& sink = moment == MomentTarget::kValue ? scalar_values[f] : scalar_squares[f];
      sink.push_back({r.label, laplace_perturb(payload, eps, 1.0, rng)});
    }
  }

  std::vector<std::string> warnings;

  // Class priors from the dedicated group, clamped positive and normalized.
  std::vector<double> priors(static_cast<std::size_t>(k), 1.0 / k);
  if (!class_group.empty()) {
    const FrequencyEstimate est = clamp_estimates(class_mechanism.aggregate(class_group));
    double total = 0.0;
    for (double c : est.counts) total += c;
    for (int j = 0; j < k; ++j) priors[static_cast<std::size_t>(j)] = est.counts[static_cast<std::size_t>(j)] / total;
  } else {
    warnings.push_back("class-label group is empty; using uniform priors");
  }

  std::vector<std::vector<ClassMoments>> feature_moments(n);
  if (options.hide_labels) {
    for (std::size_t f = 0; f < n; ++f) {
      if (masked_values[f].empty() || masked_squares[f].empty()) {
        warnings.push_back("a moment group is empty; using flat moments for a feature");
        feature_moments[f].assign(static_cast<std::size_t>(k), ClassMoments{0.0, 0.0, kVarianceFloor});
        continue;
      }
      feature_moments[f] = estimate_class_moments(masked_values[f], masked_squares[f], priors);
    }
  } else if (onebit) {
    // Per class, per-coordinate means from the one-bit reports of that class.
    auto moments_from = [&](std::vector<detail::LabeledOneBit>& reports) {
      Matrix means(static_cast<std::size_t>(k), n);
      std::vector<std::vector<OneBitReport>> by_class(static_cast<std::size_t>(k));
      for (const auto& r : reports) by_class[static_cast<std::size_t>(r.label - 1)].push_back(r.report);
      for (int j = 0; j < k; ++j) {
        const std::size_t jj = static_cast<std::size_t>(j);
        if (by_class[jj].empty()) {
          warnings.push_back("one-bit: a class is absent from a report group");
          continue;
        }
        const std::vector<double> m = estimate_means_onebit(by_class[jj], n, eps);
        for (std::size_t f = 0; f < n; ++f) means(jj, f) = m[f];
      }
      return means;
    };
    const Matrix value_means = moments_from(onebit_values);
    const Matrix square_means = moments_from(onebit_squares);
    for (std::size_t f = 0; f < n; ++f) {
      feature_moments[f].resize(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) {
        ClassMoments& cm = feature_moments[f][static_cast<std::size_t>(j)];
        cm.mu = value_means(static_cast<std::size_t>(j), f);
        cm.mu_s = square_means(static_cast<std::size_t>(j), f);
        cm.sigma2 = std::max(cm.mu_s - cm.mu * cm.mu, kVarianceFloor);
      }
    }
  } else {
    for (std::size_t f = 0; f < n; ++f) {
      if (scalar_values[f].empty() || scalar_squares[f].empty()) {
        warnings.push_back("a moment group is empty; using flat moments for a feature");
        feature_moments[f].assign(static_cast<std::size_t>(k), ClassMoments{0.0, 0.0, kVarianceFloor});
        continue;
      }
      const std::vector<double> mu = detail::class_means(scalar_values[f], k, &warnings, "values");
      const std::vector<double> mu_s = detail::class_means(scalar_squares[f], k, &warnings, "squares");
      feature_moments[f].resize(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) {
        ClassMoments& cm = feature_moments[f][static_cast<std::size_t>(j)];
        cm.mu = mu[static_cast<std::size_t>(j)];
        cm.mu_s = mu_s[static_cast<std::size_t>(j)];
        cm.sigma2 = std::max(cm.mu_s - cm.mu * cm.mu, kVarianceFloor);
      }
    }
  }

  if (diagnostics != nullptr) {
    diagnostics->individuals = train.size();
    diagnostics->reports = train.size();
    diagnostics->group_sizes = assignment.group_sizes;
    if (assignment.undersized) warnings.push_back("fewer individuals than report targets");
    for (auto& w : warnings) diagnostics->warnings.push_back(std::move(w));
  }
  return assemble_gaussian(priors, feature_moments);
}

inline double evaluate_accuracy(const NaiveBayesModel& model, std::span<const Record> test) {
  if (test.empty()) throw EmptyInputError("no test records");
  std::size_t correct = 0;
  for (const auto& r : test) {
    if (predict(model, r.x).label == r.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

// Preprocessing shared by the private and reference arms of an experiment.
enum class ContinuousPath { kNone, kDiscretize, kGaussian };

struct PreprocessSpec {
  ContinuousPath path = ContinuousPath::kNone;
  int bins = 4;                           // kDiscretize: equal-width bin count
  std::optional<DimredMethod> dimred;     // optional projection before use
  int dimred_dims = 1;
  double ridge = 1e-3;                    // discriminant regularization
};

struct PreparedSplit {
  DatasetSchema schema;
  std::vector<Record> train;
  std::vector<Record> test;
};

// Normalizes continuous features onto [-1, 1] with ranges fitted on the
// training split, optionally projects to a lower dimension (fitted on the
// training split, outputs renormalized onto [-1, 1]), and for the discretize
// path converts continuous columns to equal-width bin indices.
inline PreparedSplit preprocess_split(const DatasetSchema& schema, std::vector<Record> train,
                                      std::vector<Record> test, const PreprocessSpec& spec) {
  PreparedSplit out;
  out.schema = schema;

  if (spec.path == ContinuousPath::kNone) {
    if (!schema.all_categorical()) {
      throw SchemaError("continuous features present; pick a discretize or gaussian path");
    }
    out.train = std::move(train);
    out.test = std::move(test);
    return out;
  }

  out.schema = fit_normalization(train, std::move(out.schema));
  out.train = apply_normalization(std::move(train), out.schema);
  out.test = apply_normalization(std::move(test), out.schema);

  if (spec.dimred.has_value()) {
    if (!out.schema.all_continuous()) {
      throw SchemaError("dimensionality reduction requires all-continuous features");
    }
    std::vector<std::vector<double>> x;
    x.reserve(out.train.size());
    std::vector<int> labels;
    labels.reserve(out.train.size());
    for (const auto& r : out.train) {
      x.push_back(r.x);
      labels.push_back(r.label);
    }
    const ProjectionMatrix proj = *spec.dimred == DimredMethod::kPca
                                      ? fit_pca(x, spec.dimred_dims)
                                      : fit_dca(x, labels, spec.dimred_dims, spec.ridge);

    DatasetSchema reduced;
    reduced.name = out.schema.name;
    reduced.classes = out.schema.classes;
    reduced.features.resize(proj.output_dims());
    for (std::size_t d = 0; d < proj.output_dims(); ++d) {
      reduced.features[d].name = "proj" + std::to_string(d + 1);
      reduced.features[d].kind = ColumnKind::kContinuous;
      reduced.features[d].min = -1.0;
      reduced.features[d].max = 1.0;
    }
    auto project_all = [&](std::vector<Record>& records) {
      for (auto& r : records) r.x = project(proj, r.x);
    };
    project_all(out.train);
    project_all(out.test);
    out.schema = std::move(reduced);
  }

  if (spec.path == ContinuousPath::kDiscretize) {
    if (spec.bins < 2) throw InvalidInputError("bin count must be at least 2");
    const Binning binning{-1.0, 1.0, spec.bins};
    auto bin_all = [&](std::vector<Record>& records) {
      for (auto& r : records) {
        for (std::size_t f = 0; f < out.schema.features.size(); ++f) {
          if (out.schema.features[f].kind != ColumnKind::kContinuous) continue;
          r.x[f] = static_cast<double>(discretize(r.x[f], binning));
        }
      }
    };
    bin_all(out.train);
    bin_all(out.test);
    for (auto& col : out.schema.features) {
      if (col.kind != ColumnKind::kContinuous) continue;
      col.kind = ColumnKind::kCategorical;
      col.categories.clear();
      for (int b = 1; b <= spec.bins; ++b) col.categories.push_back("bin" + std::to_string(b));
      col.min = col.max = 0.0;
    }
  } else if (!out.schema.all_continuous()) {
    throw SchemaError("gaussian path requires all-continuous features");
  }
  return out;
}

}  // namespace ldpnb
