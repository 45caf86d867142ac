#include "ldpnb/continuous.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

#include <gtest/gtest.h>

#include "ldpnb/errors.hpp"
#include "ldpnb/random.hpp"

namespace ldpnb {
namespace {

TEST(LaplacePerturb, ValidatesInputs) {
  Rng rng(41);
  EXPECT_THROW(laplace_perturb(1.5, 1.0, 1.0, rng), InvalidInputError);
  EXPECT_THROW(laplace_perturb(-1.01, 1.0, 1.0, rng), InvalidInputError);
  EXPECT_THROW(laplace_perturb(0.5, 0.0, 1.0, rng), InvalidInputError);
  EXPECT_THROW(laplace_perturb(0.5, 1.0, 0.5, rng), InvalidInputError);
  EXPECT_NO_THROW(laplace_perturb(-1.0, 1.0, 1.0, rng));
  EXPECT_NO_THROW(laplace_perturb(1.0, 1.0, 3.0, rng));
}

TEST(LaplacePerturb, CentersOnValueWithCalibratedSpread) {
  Rng rng(42);
  const double v = 0.5, eps = 2.0, mult = 3.0;
  const double b = 2.0 * mult / eps;  // noise scale 3, variance 18
  const int n = 400000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = laplace_perturb(v, eps, mult, rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  EXPECT_NEAR(mean, v, 4.0 * std::sqrt(2.0 * b * b / n));
  EXPECT_NEAR(var, 2.0 * b * b, 4.0 * std::sqrt(20.0 * b * b * b * b / n));
}

TEST(OneBit, UpProbabilityClosedForm) {
  // eps = ln 3: P(+1 | v) = (v + 2) / 4.
  const double eps = std::log(3.0);
  EXPECT_NEAR(onebit_up_probability(1.0, eps), 0.75, 1e-15);
  EXPECT_NEAR(onebit_up_probability(0.0, eps), 0.5, 1e-15);
  EXPECT_NEAR(onebit_up_probability(-1.0, eps), 0.25, 1e-15);
  // Privacy ratio at the extremes matches e^eps.
  for (double e : {0.5, 1.0, 2.0}) {
    const double hi = onebit_up_probability(1.0, e);
    const double lo = onebit_up_probability(-1.0, e);
    EXPECT_NEAR(hi / lo, std::exp(e), std::exp(e) * 1e-12);
    EXPECT_NEAR((1.0 - lo) / (1.0 - hi), std::exp(e), std::exp(e) * 1e-12);
  }
  EXPECT_THROW(onebit_up_probability(1.1, 1.0), InvalidInputError);
}

TEST(OneBit, MagnitudeClosedForm) {
  // eps = ln 3: (3 + 1) / (3 - 1) * n = 2 n.
  EXPECT_NEAR(onebit_magnitude(std::log(3.0), 4), 8.0, 1e-12);
  EXPECT_THROW(onebit_magnitude(1.0, 0), InvalidInputError);
}

TEST(OneBit, EstimatorIsUnbiased) {
  const double eps = std::log(3.0);
  const std::vector<double> v = {0.5, -0.5};
  const std::size_t m = 200000;
  Rng rng(43);
  std::vector<OneBitReport> reports;
  reports.reserve(m);
  for (std::size_t i = 0; i < m; ++i) reports.push_back(onebit_perturb(v, eps, rng));

  const std::vector<double> est = estimate_means_onebit(reports, 2, eps);
  // est_j = magnitude / n * mean(sign) over pickers, E[sign] = v_j / 2 at
  // this eps, and magnitude / n = 2, so the estimate has sigma about
  // 2 sqrt((1 - (v/2)^2) / (m/2)).
  const double sigma = 2.0 * std::sqrt((1.0 - 0.0625) / (m / 2.0));
  EXPECT_NEAR(est[0], 0.5, 4.0 * sigma);
  EXPECT_NEAR(est[1], -0.5, 4.0 * sigma);
}

TEST(OneBit, EstimatorEdgeCases) {
  EXPECT_THROW(estimate_means_onebit({}, 2, 1.0), EmptyInputError);

  std::vector<OneBitReport> bad_coord = {{3, 1}};
  EXPECT_THROW(estimate_means_onebit(bad_coord, 2, 1.0), InconsistentReportsError);
  std::vector<OneBitReport> bad_sign = {{1, 0}};
  EXPECT_THROW(estimate_means_onebit(bad_sign, 2, 1.0), InconsistentReportsError);

  // A coordinate nobody picked estimates to 0.
  std::vector<OneBitReport> only_first = {{1, 1}, {1, -1}, {1, 1}};
  const std::vector<double> est = estimate_means_onebit(only_first, 3, 1.0);
  EXPECT_EQ(est[1], 0.0);
  EXPECT_EQ(est[2], 0.0);
  // Realized-count division: sum = magnitude, picked = 3, n = 3.
  EXPECT_NEAR(est[0], onebit_magnitude(1.0, 3) / 9.0, 1e-12);
}

TEST(MaskedVector, BuildPlacesPayloadInClassSlot) {
  const MaskedVector v = build_masked_vector(0.5, MomentTarget::kValue, 2, 3);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 0.5);
  EXPECT_EQ(v[2], 0.0);

  const MaskedVector s = build_masked_vector(-0.5, MomentTarget::kSquaredValue, 1, 2);
  EXPECT_EQ(s[0], 0.25);
  EXPECT_EQ(s[1], 0.0);

  EXPECT_THROW(build_masked_vector(0.5, MomentTarget::kValue, 0, 3), InvalidInputError);
  EXPECT_THROW(build_masked_vector(0.5, MomentTarget::kValue, 4, 3), InvalidInputError);
  EXPECT_THROW(build_masked_vector(0.5, MomentTarget::kValue, 1, 1), InvalidInputError);
  EXPECT_THROW(build_masked_vector(1.5, MomentTarget::kValue, 1, 2), InvalidInputError);
}

TEST(MaskedVector, PerturbAddsCalibratedNoisePerSlot) {
  Rng rng(44);
  const double eps = 2.0;  // slot noise Lap(1), variance 2
  const int n = 200000;
  std::vector<double> sum(2, 0.0), sum_sq(2, 0.0);
  for (int i = 0; i < n; ++i) {
    const MaskedVector m = masked_vector_perturb(0.8, MomentTarget::kValue, 1, 2, eps, rng);
    for (std::size_t j = 0; j < 2; ++j) {
      sum[j] += m[j];
      sum_sq[j] += m[j] * m[j];
    }
  }
  const double mean_bound = 4.0 * std::sqrt(2.0 / n);
  for (std::size_t j = 0; j < 2; ++j) {
    const double mean = sum[j] / n;
    EXPECT_NEAR(mean, j == 0 ? 0.8 : 0.0, mean_bound);
    EXPECT_NEAR(sum_sq[j] / n - mean * mean, 2.0, 4.0 * std::sqrt(20.0 / n));
  }
  // Doubling the multiplier doubles the scale: variance 8.
  Rng rng2(45);
  double var_sum = 0.0, var_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double slot = masked_vector_perturb(0.0, MomentTarget::kValue, 1, 2, eps, rng2, 2.0)[0];
    var_sum += slot;
    var_sq += slot * slot;
  }
  const double mean2 = var_sum / n;
  EXPECT_NEAR(var_sq / n - mean2 * mean2, 8.0, 4.0 * std::sqrt(20.0 * 16.0 / n));
}

TEST(EstimateMean, ExactSmallCase) {
  const std::vector<double> values = {0.1, 0.3, 0.5};
  EXPECT_NEAR(estimate_mean(values), 0.3, 1e-15);
  EXPECT_THROW(estimate_mean({}), EmptyInputError);
}

TEST(ClassMoments, NoiselessReportsRecoverEmpiricalMomentsExactly) {
  // Class 1 values {0.2, 0.4}, class 2 values {-0.3, -0.1}, priors 1/2 each.
  struct Row {
    double v;
    int c;
  };
  const std::vector<Row> rows = {{0.2, 1}, {0.4, 1}, {-0.3, 2}, {-0.1, 2}};
  std::vector<MaskedVector> values, squares;
  for (const Row& r : rows) {
    values.push_back(build_masked_vector(r.v, MomentTarget::kValue, r.c, 2));
    squares.push_back(build_masked_vector(r.v, MomentTarget::kSquaredValue, r.c, 2));
  }
  const std::vector<double> priors = {0.5, 0.5};
  const std::vector<ClassMoments> moments = estimate_class_moments(values, squares, priors);

  ASSERT_EQ(moments.size(), 2u);
  EXPECT_NEAR(moments[0].mu, 0.3, 1e-12);
  EXPECT_NEAR(moments[0].mu_s, 0.1, 1e-12);
  EXPECT_NEAR(moments[0].sigma2, 0.01, 1e-12);  // population variance of {0.2, 0.4}
  EXPECT_NEAR(moments[1].mu, -0.2, 1e-12);
  EXPECT_NEAR(moments[1].mu_s, 0.05, 1e-12);
  EXPECT_NEAR(moments[1].sigma2, 0.01, 1e-12);
}

TEST(ClassMoments, VarianceFloorApplies) {
  // A single value per class makes mu_s - mu^2 exactly 0, which floors.
  std::vector<MaskedVector> values = {build_masked_vector(0.5, MomentTarget::kValue, 1, 2),
                                      build_masked_vector(-0.5, MomentTarget::kValue, 2, 2)};
  std::vector<MaskedVector> squares = {build_masked_vector(0.5, MomentTarget::kSquaredValue, 1, 2),
                                       build_masked_vector(-0.5, MomentTarget::kSquaredValue, 2, 2)};
  const std::vector<double> priors = {0.5, 0.5};
  const std::vector<ClassMoments> moments = estimate_class_moments(values, squares, priors);
  EXPECT_EQ(moments[0].sigma2, kVarianceFloor);
  EXPECT_EQ(moments[1].sigma2, kVarianceFloor);
}

TEST(ClassMoments, Validation) {
  std::vector<MaskedVector> ok = {build_masked_vector(0.5, MomentTarget::kValue, 1, 2)};
  const std::vector<double> priors = {0.5, 0.5};

  EXPECT_THROW(estimate_class_moments({}, ok, priors), EmptyInputError);
  EXPECT_THROW(estimate_class_moments(ok, {}, priors), EmptyInputError);

  std::vector<double> bad_prior = {1.0, 0.0};
  EXPECT_THROW(estimate_class_moments(ok, ok, bad_prior), DegenerateDataError);
  std::vector<double> not_normalized = {0.5, 0.4};
  EXPECT_THROW(estimate_class_moments(ok, ok, not_normalized), InvalidInputError);
  std::vector<double> one_class = {1.0};
  EXPECT_THROW(estimate_class_moments(ok, ok, one_class), InvalidInputError);

  std::vector<MaskedVector> wrong_len = {{0.1, 0.2, 0.3}};
  EXPECT_THROW(estimate_class_moments(wrong_len, ok, priors), InconsistentReportsError);
}

}  // namespace
}  // namespace ldpnb
