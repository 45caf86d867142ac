#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ldpnb/errors.hpp"
#include "ldpnb/freq.hpp"

namespace ldpnb {

// A feature value a in [1, cardinality] and a class v in [1, class_count]
// combine into one index in [1, cardinality * class_count], so a single
// frequency oracle over the joint domain recovers the whole contingency
// table of that feature against the class.
struct JointDomain {
  int cardinality = 0;
  int class_count = 0;

  int size() const { return cardinality * class_count; }
};

inline void validate_joint_domain(const JointDomain& dom) {
  if (dom.cardinality < 1) throw InvalidInputError("feature cardinality must be at least 1");
  if (dom.class_count < 2) throw InvalidInputError("class count must be at least 2");
}

inline int encode_joint(int feature_value, int class_value, const JointDomain& dom) {
  validate_joint_domain(dom);
  if (feature_value < 1 || feature_value > dom.cardinality) {
    throw InvalidInputError("feature value out of [1, cardinality]");
  }
  if (class_value < 1 || class_value > dom.class_count) {
    throw InvalidInputError("class value out of [1, class_count]");
  }
  return (feature_value - 1) * dom.class_count + class_value;
}

inline std::pair<int, int> decode_joint(int encoded, const JointDomain& dom) {
  validate_joint_domain(dom);
  if (encoded < 1 || encoded > dom.size()) throw InvalidInputError("encoded value out of [1, cardinality * class_count]");
  const int feature_value = (encoded - 1) / dom.class_count + 1;
  const int class_value = (encoded - 1) % dom.class_count + 1;
  return {feature_value, class_value};
}

// Equal-width bins over [min, max]. Bins are left-closed and right-open,
// except the last, which is closed on both sides; values outside the range
// clip to the nearest edge bin.
struct Binning {
  double min = 0.0;
  double max = 0.0;
  int bins = 0;
};

inline void validate_binning(const Binning& b) {
  if (b.bins < 2) throw InvalidInputError("bin count must be at least 2");
  if (!(b.max > b.min)) throw DegenerateDataError("binning range must have max > min");
}

inline int discretize(double x, const Binning& b) {
  validate_binning(b);
  if (x <= b.min) return 1;
  if (x >= b.max) return b.bins;
  const double width = (b.max - b.min) / b.bins;
  int bin = static_cast<int>(std::floor((x - b.min) / width)) + 1;
  if (bin < 1) bin = 1;
  if (bin > b.bins) bin = b.bins;
  return bin;
}

// Estimated counts at or below zero are unusable as frequencies; set them to
// one count before normalization.
inline FrequencyEstimate clamp_estimates(FrequencyEstimate est) {
  for (double& c : est.counts) {
    if (c <= 0.0) c = 1.0;
  }
  return est;
}

}  // namespace ldpnb
