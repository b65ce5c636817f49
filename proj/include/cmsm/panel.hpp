#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cmsm/model.hpp"

namespace cmsm {

// Population-averaging rule: AllMembers weights every cluster by 1 (member-
// level averaging, estimand for a randomly chosen member of the pooled
// population); TypicalMember weights clusters by 1/M_i (estimand for one
// randomly chosen member of a randomly chosen cluster).
enum class Weighting { AllMembers, TypicalMember };

struct TransitionType {
  int from = 0;
  int to = 0;
  bool operator==(const TransitionType&) const = default;
};

// Weighted cluster-level sums for one set of resampling weights U (U = 1 for
// the observed data). All estimation downstream reads only these sums, so the
// bootstrap path and the point-estimate path are literally the same code.
struct PooledPanel {
  Eigen::VectorXd dNbar;   // P*G, sum_i U_i w_i dN_{i,p}(t_g)
  Eigen::VectorXd Ybar;    // k*G, sum_i U_i w_i Y_{i,h}(t_g)
  Eigen::VectorXd Y0w;     // k,   sum_i U_i w_i Y_{i,h}(0+)
  double pi_hat = 1.0;     // n^{-1} sum_i U_i M_i^{-1} Y_{i,.}(0+)
  double sumUM = 0.0;      // sum_i U_i M_i
  double n = 0.0;          // sum_i U_i  (= cluster count)
};

// Cluster-level counting processes on the pooled event grid. Time convention:
// at-risk is left-continuous (Y(t) counts members in the state just before t
// and still under observation at t, entry < t <= terminus), counts are
// right-continuous, and tied event times share one grid point.
struct RiskPanel {
  StateSpace state_space;
  Weighting weighting = Weighting::AllMembers;
  int n = 0;                        // clusters
  int G = 0;                        // grid points
  int P = 0;                        // observed transition types
  double tau = 0.0;                 // max observed time
  std::vector<double> grid;         // sorted distinct event times
  std::vector<TransitionType> types;

  // Raw (unweighted) cluster-level processes.
  Eigen::MatrixXd cluster_dN;       // n x (P*G)
  Eigen::MatrixXd cluster_Y;        // n x (k*G)
  Eigen::MatrixXd Y0;               // n x k, at-risk just after time 0
  Eigen::VectorXd w;                // n, 1 or 1/M_i
  Eigen::VectorXd M;                // n, cluster sizes

  PooledPanel base;                 // pooled with U = 1

  int k() const { return state_space.k; }
  int pg(int p, int g) const { return p * G + g; }
  int hg(int h0, int g) const { return h0 * G + g; }
  int type_index(int from, int to) const;   // -1 if unobserved

  // Last grid index with grid[idx] <= t, or -1 when t precedes the grid.
  int index_at(double t) const;
};

// Builds the panel from a validated dataset. `extra_times` merges additional
// grid points (used to align two samples on their union grid); they carry no
// events of their own.
RiskPanel build_panel(const ClusteredDataset& data, Weighting weighting,
                      std::span<const double> extra_times = {});

// Pooled sums under resampling weights U (length n). pool_panel(panel) uses
// U = 1 and reproduces panel.base exactly.
PooledPanel pool_panel(const RiskPanel& panel);
PooledPanel pool_panel(const RiskPanel& panel, const Eigen::VectorXd& U);

// Grid points where estimation from time s is supported: t_g > s and every
// transient state that has contributed events on (s, t_g] still has a
// positive pooled risk set at t_g. Outside this set estimates are reported
// but flagged: pointwise/simultaneous inference skips those points.
std::vector<char> domain_flags(const RiskPanel& panel, double s = 0.0);

struct LandmarkSpec {
  double s = 0.0;   // landmark time
  int state = 0;    // conditioning state occupied at s
};

// Subjects observed in `spec.state` at time s, histories before s discarded;
// the result re-enters the ordinary pipeline with estimation start s.
// Throws Error("NoSubjectsAtLandmark") when nobody qualifies.
ClusteredDataset landmark_restrict(const ClusteredDataset& data,
                                   const LandmarkSpec& spec);

}  // namespace cmsm
