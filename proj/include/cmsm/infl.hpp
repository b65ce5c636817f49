#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cmsm/estim.hpp"
#include "cmsm/panel.hpp"

namespace cmsm {

// Per-cluster influence trajectories for one target curve. Row i holds the
// estimated influence of cluster i on sqrt(n) * (estimate - truth), as a step
// function over the panel grid. Rows sum to zero at every grid point up to
// floating-point cancellation; cluster-robust variances are plain second
// moments of the rows.
struct InfluenceSet {
  TargetSpec target;
  int n = 0;
  std::vector<double> grid;
  Eigen::MatrixXd values;     // n x G
  std::vector<char> valid;    // G, from domain_flags

  int index_at(double t) const;
};

// Influence of each cluster on the transition probability P_{from,to}(s, .).
// Throws Error("EmptySupport") when no grid point after s is in-domain.
InfluenceSet transition_influence(const RiskPanel& panel,
                                  const CumulativeIntensityPath& intensity,
                                  double s, int from, int to);

// Influence of each cluster on the state occupation probability P_state(.),
// combining transition influence terms with the initial-distribution and
// cluster-size residuals.
InfluenceSet occupation_influence(const RiskPanel& panel,
                                  const CumulativeIntensityPath& intensity,
                                  int state);

struct CovarianceEstimate {
  double t1 = 0.0, t2 = 0.0;
  double value = 0.0;          // n^{-1} sum_i g_i(t1) g_i(t2)
  int n = 0;
  double se() const;           // sqrt(value/n); meaningful when t1 == t2
};

// Cross-time covariance of the limit process. Throws Error("OutOfDomain")
// when either time lands on a flagged grid point.
CovarianceEstimate covariance_at(const InfluenceSet& infl, double t1, double t2);

// sigma^2(t_g) = n^{-1} sum_i g_i(t_g)^2 over the whole grid (no domain check).
Eigen::VectorXd variance_curve(const InfluenceSet& infl);

// Standard error of the estimate itself: sqrt(sigma^2(t_g)/n).
Eigen::VectorXd se_curve(const InfluenceSet& infl);

}  // namespace cmsm
