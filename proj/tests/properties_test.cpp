// Invariants that must hold across seeds: report accounting, encoding
// bijectivity, clamp positivity, CPT normalization, argmax shift
// invariance, and accuracy monotone in epsilon.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ldpnb/ldpnb.hpp"
#include "support/synthetic.hpp"

namespace ldpnb {
namespace {

using testsupport::CategoricalSpec;
using testsupport::GaussianXSpec;
using testsupport::GeneratedDataset;

const std::vector<std::uint64_t> kSeeds = {1, 2, 3};

class PropertySuite : public ::testing::TestWithParam<std::uint64_t> {};

INSTANTIATE_TEST_SUITE_P(Seeds, PropertySuite, ::testing::ValuesIn(kSeeds),
                         [](const auto& info) { return "seed" + std::to_string(info.param); });

GeneratedDataset small_categorical(std::uint64_t seed) {
  CategoricalSpec spec;
  spec.rows = 600;
  spec.features = 3;
  spec.cardinality = 4;
  spec.priors = {0.5, 0.5};
  spec.peak_strength = {0.7};
  Rng rng(mix_seed(seed, 0xda7a));
  return testsupport::make_categorical(spec, rng);
}

TEST_P(PropertySuite, EveryIndividualContributesExactlyOneReport) {
  const std::uint64_t seed = GetParam();
  const GeneratedDataset data = small_categorical(seed);

  DiscreteRunOptions opt;
  opt.privacy.epsilon = 1.0;
  opt.mechanism = MechanismKind::OUE;
  Rng rng(mix_seed(seed, 1));
  RunDiagnostics diag;
  run_discrete(data.records, data.schema, opt, rng, &diag);
  EXPECT_EQ(diag.individuals, data.records.size());
  EXPECT_EQ(diag.reports, data.records.size());
  const std::size_t assigned =
      std::accumulate(diag.group_sizes.begin(), diag.group_sizes.end(), std::size_t{0});
  EXPECT_EQ(assigned, data.records.size());

  GaussianXSpec gspec;
  gspec.rows = 400;
  gspec.means = {{-0.3, -0.3}, {0.3, 0.3}};
  gspec.sigmas = {{0.2, 0.2}, {0.2, 0.2}};
  Rng grng(mix_seed(seed, 2));
  const GeneratedDataset gdata = testsupport::make_gaussian(gspec, grng);
  for (int approach : {1, 2, 3}) {
    GaussianRunOptions gopt;
    gopt.privacy.epsilon = 1.0;
    gopt.approach = approach;
    gopt.hide_labels = (approach != 2);
    Rng run_rng(mix_seed(seed, static_cast<std::uint64_t>(10 + approach)));
    RunDiagnostics gdiag;
    run_gaussian(gdata.records, gdata.schema, gopt, run_rng, &gdiag);
    EXPECT_EQ(gdiag.reports, gdata.records.size()) << "approach " << approach;
    const std::size_t gassigned =
        std::accumulate(gdiag.group_sizes.begin(), gdiag.group_sizes.end(), std::size_t{0});
    EXPECT_EQ(gassigned, gdata.records.size()) << "approach " << approach;
  }
}

TEST(EncodingProperties, JointEncodingIsABijection) {
  for (const auto& [card, classes] : {std::pair{2, 2}, {5, 3}, {4, 7}, {12, 2}}) {
    const JointDomain dom{card, classes};
    std::vector<bool> hit(static_cast<std::size_t>(dom.size()), false);
    for (int a = 1; a <= card; ++a) {
      for (int v = 1; v <= classes; ++v) {
        const int e = encode_joint(a, v, dom);
        ASSERT_GE(e, 1);
        ASSERT_LE(e, dom.size());
        EXPECT_FALSE(hit[static_cast<std::size_t>(e - 1)]) << "collision at " << e;
        hit[static_cast<std::size_t>(e - 1)] = true;
        const auto [back_a, back_v] = decode_joint(e, dom);
        EXPECT_EQ(back_a, a);
        EXPECT_EQ(back_v, v);
      }
    }
  }
}

TEST_P(PropertySuite, ClampedEstimatesAreStrictlyPositive) {
  Rng rng(mix_seed(GetParam(), 3));
  FrequencyEstimate est;
  est.m = 100;
  est.counts.resize(64);
  for (double& c : est.counts) c = 50.0 * sample_normal(rng);
  const FrequencyEstimate clamped = clamp_estimates(est);
  for (std::size_t i = 0; i < clamped.counts.size(); ++i) {
    EXPECT_GT(clamped.counts[i], 0.0);
    if (est.counts[i] > 0.0) {
      EXPECT_EQ(clamped.counts[i], est.counts[i]);
    }
  }
}

TEST_P(PropertySuite, ConditionalTablesAreNormalized) {
  const std::uint64_t seed = GetParam();
  const GeneratedDataset data = small_categorical(seed);
  DiscreteRunOptions opt;
  opt.privacy.epsilon = 0.5;
  opt.mechanism = MechanismKind::SUE;
  Rng rng(mix_seed(seed, 4));
  const NaiveBayesModel model = run_discrete(data.records, data.schema, opt, rng);

  const double prior_sum = std::accumulate(model.priors.begin(), model.priors.end(), 0.0);
  EXPECT_NEAR(prior_sum, 1.0, 1e-12);
  for (const auto& feature : model.features) {
    const auto* discrete = std::get_if<DiscreteFeatureParams>(&feature);
    ASSERT_NE(discrete, nullptr);
    for (std::size_t j = 0; j < static_cast<std::size_t>(data.schema.class_count()); ++j) {
      double col = 0.0;
      for (std::size_t a = 0; a < static_cast<std::size_t>(discrete->cardinality); ++a)
        col += discrete->probs(a, j);
      EXPECT_NEAR(col, 1.0, 1e-12) << "class " << j + 1;
    }
  }
}

TEST_P(PropertySuite, PredictionInvariantUnderUniformLogScoreShift) {
  const std::uint64_t seed = GetParam();
  const GeneratedDataset data = small_categorical(seed);
  DiscreteRunOptions opt;
  opt.privacy.epsilon = 2.0;
  Rng rng(mix_seed(seed, 5));
  const NaiveBayesModel model = run_discrete(data.records, data.schema, opt, rng);

  // Scaling one feature's whole table (or all priors) by a constant shifts
  // every class's log score by the same amount.
  NaiveBayesModel scaled = model;
  auto& table = std::get<DiscreteFeatureParams>(scaled.features[0]);
  for (double& p : table.probs.data()) p *= 0.37;
  for (double& u : table.unseen) u *= 0.37;
  NaiveBayesModel scaled_priors = model;
  for (double& p : scaled_priors.priors) p *= 4.2;

  Rng point_rng(mix_seed(seed, 6));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(data.schema.feature_count());
    for (std::size_t f = 0; f < x.size(); ++f) {
      // Category 9 never occurs at training time and exercises the unseen
      // fallback.
      const bool unseen = uniform_index(point_rng, 10) == 0;
      x[f] = unseen ? 9.0 : static_cast<double>(1 + uniform_index(point_rng, 4));
    }
    const Prediction base = predict(model, x);
    EXPECT_EQ(predict(scaled, x).label, base.label);
    EXPECT_EQ(predict(scaled_priors, x).label, base.label);
  }
}

TEST_P(PropertySuite, AccuracyIsMonotoneInEpsilon) {
  const std::uint64_t seed = GetParam();

  CategoricalSpec spec;
  spec.rows = 2000;
  spec.features = 4;
  spec.cardinality = 4;
  spec.priors = {0.5, 0.5};
  spec.peak_strength = {0.55, 0.40};
  Rng data_rng(mix_seed(seed, 7));
  const GeneratedDataset data = testsupport::make_categorical(spec, data_rng);

  SweepConfig cfg;
  cfg.dataset.path = "unused";
  cfg.dataset.name = data.schema.name;
  cfg.mechanisms = {MechanismKind::DE};
  cfg.epsilons = {0.5, 1.0, 2.0, 5.0};
  cfg.strategies = {parse_strategy("discrete")};
  cfg.repetitions = 50;
  cfg.seed = seed;
  const SweepResult result = run_sweep(cfg, data.schema, data.records);

  ASSERT_EQ(result.rows.size(), 5u);
  for (std::size_t i = 2; i < result.rows.size(); ++i) {
    EXPECT_GE(result.rows[i].mean_accuracy, result.rows[i - 1].mean_accuracy - 0.02)
        << "epsilon " << result.rows[i].epsilon << " vs " << result.rows[i - 1].epsilon;
  }
  // The near-noiseless end should approach the non-private reference.
  EXPECT_GE(result.rows[4].mean_accuracy, result.rows[0].mean_accuracy - 0.05);
}

}  // namespace
}  // namespace ldpnb
