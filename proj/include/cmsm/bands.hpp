#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cmsm/resample.hpp"

namespace cmsm {

// Monotone transforms for probability-scale confidence limits. g maps the
// estimate scale to the working scale, dg is its derivative, ginv maps back.
enum class TransformKind { Identity, LogLog, Logit };

struct Transform {
  TransformKind kind = TransformKind::Identity;

  double g(double x) const;
  double ginv(double y) const;
  double dg(double x) const;
  bool in_domain(double x) const;   // open interval where g is finite

  static Transform identity() { return {TransformKind::Identity}; }
  static Transform loglog() { return {TransformKind::LogLog}; }
  static Transform logit() { return {TransformKind::Logit}; }
};

// Pointwise interval on the transformed scale, endpoints ordered after the
// back-transform. A zero standard error collapses to the point estimate; an
// estimate outside the transform domain is reported as undefined.
struct PointwiseCI {
  double lower = 0.0, upper = 0.0;
  bool defined = false;
};

PointwiseCI pointwise_ci(double est, double se, const Transform& transform,
                         double alpha);

struct BandSpec {
  double alpha = 0.05;
  TransformKind transform = TransformKind::LogLog;
  double lo_pct = 0.10;            // band domain: jump-time percentile window
  double hi_pct = 0.90;
  ResampleMethod method = ResampleMethod::Multiplier;
  int B = 1000;
};

// Simultaneous confidence band over the percentile window of relevant jump
// times. `indices` selects the grid points covered; lower/upper/center align
// with it. c_alpha is the nearest-rank (1-alpha) quantile of the replicate
// sup statistics; replicates with an unusable point in the window are
// dropped and counted.
struct Band {
  BandSpec spec;
  std::vector<double> grid;
  std::vector<int> indices;
  Eigen::VectorXd center;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double c_alpha = 0.0;
  int used_replicates = 0;
  int dropped_replicates = 0;

  bool covers(const Eigen::VectorXd& truth_at_indices) const;
};

// Grid indices inside the band domain: the [lo_pct, hi_pct] nearest-rank
// window of relevant jump times (occupation target: transitions into the
// state; transition target: transitions into `to` after s), kept to valid
// points where the transform is defined. Throws Error("EmptyBandDomain")
// when nothing qualifies.
std::vector<int> band_domain(const EstimationTask& task, const BandSpec& spec);

Band simultaneous_band(const EstimationTask& task, const BandSpec& spec,
                       const SeedSpec& seed, int threads = 1);

// Same construction from replicates that already exist.
Band band_from_replicates(const EstimationTask& task, const ReplicateSet& reps,
                          const BandSpec& spec);

// States that can lie on a path realizing the target: for a transition
// target, transient states d with from ~> d ~> to under the allowed
// transitions; for an occupation target, the union over all transient
// origins. Reachability includes the empty path.
std::vector<int> path_states(const StateSpace& ss, const TargetSpec& target);

enum class WeightKind { Indicator, RiskRatio };

// Weight process on the shared grid, built from the two pooled risk sets
// restricted to the mediating states L. Indicator: 1 where every state in L
// has positive risk in both samples. RiskRatio: the product over L of
// y1 * y2 divided by the sum over L of (y1 + y2), with y the
// per-cluster-average risk; 0 where the risk sets are empty.
Eigen::VectorXd make_weight(const RiskPanel& panel1, const RiskPanel& panel2,
                            WeightKind kind, const std::vector<int>& states);

// Two-sample Kolmogorov-Smirnov-type comparison of one target curve.
struct TestResult {
  TargetSpec target;
  WeightKind weight_kind = WeightKind::Indicator;
  ResampleMethod method = ResampleMethod::Multiplier;
  int B = 0;
  int n = 0;                      // clusters per arm
  double statistic = 0.0;         // sup_t W(t) |delta(t)|
  double scaled_statistic = 0.0;  // sqrt(n) * statistic
  double p_value = 1.0;
  std::vector<double> grid;       // union grid
  Eigen::VectorXd delta;          // arm1 - arm2
  Eigen::VectorXd weight;
  std::vector<char> mask;         // points entering the sup
  int used_replicates = 0;
  int dropped_replicates = 0;
};

// Splits `data` by arm, aligns both samples on the union event grid, and
// calibrates the sup statistic against its resampled null distribution
// (multipliers and bootstrap weights are shared between the arms so the
// cluster coupling is preserved). p = #{replicate >= observed}/B, or the
// plus-one version when requested.
TestResult ks_two_sample(const ClusteredDataset& data, const TargetSpec& target,
                         WeightKind kind, ResampleMethod method, int B,
                         const SeedSpec& seed, bool plus_one = false,
                         int threads = 1);

}  // namespace cmsm
