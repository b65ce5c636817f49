#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cmsm/bands.hpp"
#include "cmsm/model.hpp"
#include "cmsm/resample.hpp"
#include "cmsm/rng.hpp"

namespace cmsm {

// Cluster-correlated illness-death trial generator. Members of a cluster
// share a gamma frailty that scales every transition intensity. Clusters at
// or below the mean size carry an extra illness intensity, so cluster size
// is informative; arm 2 carries a further additive illness intensity when a
// treatment effect is set. Censoring is uniform and independent of the
// process. Every subject starts in state 1 at time zero.
struct SimConfig {
  int clusters = 40;
  int size_lo = 5;                // cluster size uniform on {size_lo..size_hi}
  int size_hi = 15;
  double frailty_shape = 1.0;
  double frailty_scale = 1.0;
  double rate_illness = 0.25;     // 1 -> 2
  double rate_direct = 0.25;      // 1 -> 3
  double rate_post = 0.50;        // 2 -> 3
  double small_bump = 0.25;       // extra 1 -> 2 intensity for small clusters
  double treat_effect = 0.0;      // extra 1 -> 2 intensity in arm 2
  bool two_arm = false;           // 1:1 allocation within every cluster
  double censor_lo = 0.0;
  double censor_hi = 3.0;

  double mean_size() const { return 0.5 * (size_lo + size_hi); }
  StateSpace state_space() const;
};

// intensity multipliers {1->2, 1->3, 2->3} before the frailty;
// arm 0 and arm 1 are untreated, arm 2 adds the treatment effect
std::array<double, 3> subject_rates(const SimConfig& cfg, int cluster_size,
                                    int arm);

// One trial addressed by (seed, replicate): cluster sizes and frailties from
// stream (Dataset, replicate), odd-cluster allocation coins from
// (ArmAssignment, replicate). Throws Error("ConfigInvalid") on a config the
// generator cannot honor.
ClusteredDataset simulate_trial(const SimConfig& cfg, const SeedSpec& seed,
                                std::uint64_t replicate);

// Exact occupation probability of the illness state at time t under the
// generator, via the gamma Laplace transform: for a typical member of a
// typical cluster (TypicalMember) or a typical member of the member
// population (AllMembers, cluster sizes weight the mixture).
double illness_occupation_truth(const SimConfig& cfg, double t,
                                Weighting weighting, int arm = 0);

// Expected member fractions by first observed move under the censoring law:
// {no observed event, into the illness state, straight to the absorbing
// state}. Sums to one.
std::array<double, 3> first_move_fractions(const SimConfig& cfg);

// Of the members observed to enter the illness state, the expected fraction
// whose absorbing transition is also observed.
double illness_onward_fraction(const SimConfig& cfg);

// Each member becomes its own one-member cluster, erasing the grouping.
// The pooled all-members point estimate is unchanged; variances and
// resampling then treat members as independent.
ClusteredDataset singleton_clusters(const ClusteredDataset& data);

// Monte Carlo evaluation of the one-sample analyses. Each replication r
// simulates a trial from (Dataset, r), analyzes the illness-state occupation
// with the typical-member weighting (influence and bootstrap standard
// errors) and with the grouping-blind member-level comparator, evaluates
// point estimates at per-dataset follow-up percentiles against the exact
// truth, and checks simultaneous bands over the jump-percentile window.
struct StudyConfig {
  SimConfig sim;
  int replications = 1000;
  int multiplier_B = 1000;
  int bootstrap_B = 1000;
  double alpha = 0.05;
  std::vector<double> tau_pcts{0.4, 0.6};
  int threads = 1;
};

struct PointSummary {
  double tau_pct = 0.0;
  double mean_tau = 0.0;
  double bias = 0.0;       // mean(estimate - truth)
  double emp_sd = 0.0;     // sd(estimate - truth)
  double mean_se = 0.0;
  double coverage = 0.0;   // two-sided identity-scale interval
  int used = 0;
};

struct BandSummary {
  double coverage = 0.0;
  int used = 0;
  int failed = 0;          // replications without a usable band
};

struct StudyReport {
  StudyConfig config;
  std::vector<PointSummary> typical_if;     // one entry per tau percentile
  std::vector<PointSummary> typical_boot;
  std::vector<PointSummary> naive_member;
  BandSummary band_if;
  BandSummary band_boot;
  BandSummary band_naive;
  std::array<double, 3> move_fractions{};   // observed member composition
  double onward_fraction = 0.0;
  int replications_used = 0;
};

StudyReport run_estimation_study(const StudyConfig& cfg, const SeedSpec& seed);

// Monte Carlo rejection rate of the two-sample comparison of the
// illness-state occupation between arms. Requires a two-arm generator.
struct TestStudyConfig {
  SimConfig sim;
  int replications = 1000;
  int B = 1000;
  double alpha = 0.05;
  Weighting weighting = Weighting::TypicalMember;
  WeightKind weight = WeightKind::RiskRatio;
  ResampleMethod method = ResampleMethod::Multiplier;
  int threads = 1;
};

struct TestStudyReport {
  TestStudyConfig config;
  double rejection_rate = 0.0;
  double mean_statistic = 0.0;   // mean scaled sup statistic
  int used = 0;
  int failed = 0;                // replications where the test was undefined
};

TestStudyReport run_test_study(const TestStudyConfig& cfg,
                               const SeedSpec& seed);

}  // namespace cmsm
