#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "cmsm/estim.hpp"
#include "cmsm/infl.hpp"
#include "cmsm/panel.hpp"
#include "cmsm/rng.hpp"

namespace cmsm {

enum class ResampleMethod { Multiplier, ClusterBootstrap };

// One target analyzed on one dataset: the panel, the fitted intensity, the
// point estimate on the panel grid, and the per-cluster influence rows.
// Everything downstream (variances, replicates, bands, tests) reads this.
struct EstimationTask {
  RiskPanel panel;
  CumulativeIntensityPath intensity;
  TargetSpec target;
  Eigen::VectorXd point;     // target curve at each grid point
  InfluenceSet infl;
};

EstimationTask make_task(const ClusteredDataset& data, const TargetSpec& target,
                         std::span<const double> extra_times = {});

// Multiplier realization n^{-1/2} sum_i g_i(.) xi_i of the limit process.
Eigen::VectorXd multiplier_from_xi(const InfluenceSet& infl,
                                   const Eigen::VectorXd& xi);

// Standard normal multipliers from stream (Multiplier, index).
Eigen::VectorXd multiplier_draw(const InfluenceSet& infl, const SeedSpec& seed,
                                std::uint64_t index);

// One cluster-bootstrap re-estimate: the target curve recomputed on the
// original grid from weighted pooled sums. `valid` applies the cumulative
// rule: once a grid point carrying original events loses its replicate risk
// set (or the replicate has no initial mass at all, for occupation targets),
// the curve is invalid from there (or everywhere) on.
struct BootstrapReplicate {
  Eigen::VectorXd weights;       // U, multinomial(n; 1/n) counts
  Eigen::VectorXd curve;
  std::vector<char> valid;
};

BootstrapReplicate bootstrap_with_weights(const RiskPanel& panel,
                                          const TargetSpec& target,
                                          const Eigen::VectorXd& U);

// Weights from stream (BootstrapWeights, index), then re-estimation.
BootstrapReplicate cluster_bootstrap_draw(const RiskPanel& panel,
                                          const TargetSpec& target,
                                          const SeedSpec& seed,
                                          std::uint64_t index);

// B replicate trajectories of the limit process sqrt(n)(estimate - truth):
// multiplier realizations directly, or sqrt(n) (curve* - point) for the
// cluster bootstrap. Row b is fully determined by (seed, b), never by
// thread scheduling.
struct ReplicateSet {
  ResampleMethod method = ResampleMethod::Multiplier;
  int B = 0;
  int n = 0;
  std::vector<double> grid;
  Eigen::MatrixXd traj;          // B x G
  std::vector<char> valid;       // B*G row-major
  SeedSpec seed;

  bool ok(int b, int g) const {
    return valid[static_cast<std::size_t>(b) * grid.size() +
                 static_cast<std::size_t>(g)] != 0;
  }
};

ReplicateSet replicate_curves(const EstimationTask& task, ResampleMethod method,
                              int B, const SeedSpec& seed, int threads = 1);

}  // namespace cmsm
