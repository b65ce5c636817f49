#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cmsm/panel.hpp"

namespace cmsm {

// What a downstream quantity (curve, variance, band, test) is about.
struct TargetSpec {
  enum class Kind { Transition, Occupation };
  Kind kind = Kind::Occupation;
  int from = 0;                    // transition only
  int to = 0;                      // transition: destination; occupation: state
  double s = 0.0;                  // transition start time
  Weighting weighting = Weighting::TypicalMember;

  static TargetSpec transition(int from, int to, double s, Weighting w) {
    return {Kind::Transition, from, to, s, w};
  }
  static TargetSpec occupation(int state, Weighting w) {
    return {Kind::Occupation, 0, state, 0.0, w};
  }
};

// Increments of the cumulative transition intensity matrix on the event grid.
// Row h of increments[g] holds dA_hj(t_g) = dNbar_hj(t_g)/Ybar_h(t_g) off the
// diagonal and the negative row sum on it.
struct CumulativeIntensityPath {
  Weighting weighting = Weighting::AllMembers;
  int k = 0;
  std::vector<double> grid;
  std::vector<TransitionType> types;
  std::vector<Eigen::MatrixXd> increments;   // G matrices, k x k

  Eigen::MatrixXd cumulative(double t) const;   // A(t), zero matrix before grid
};

CumulativeIntensityPath nelson_aalen(const RiskPanel& panel);
CumulativeIntensityPath nelson_aalen(const RiskPanel& panel,
                                     const PooledPanel& pooled);

// Product-integral transition probability matrices P(s, t_g) over the grid.
// values[g] = prod_{s < u <= t_g} (I + dA(u)), taken in time order; rows are
// checked against unit sums (tolerance 1e-12) rather than renormalized.
struct TransitionCurve {
  double s = 0.0;
  Weighting weighting = Weighting::AllMembers;
  bool markov_only = false;   // estimated from s > 0 without landmarking
  int k = 0;
  std::vector<double> grid;   // full panel grid (values before s equal I)
  std::vector<Eigen::MatrixXd> values;

  Eigen::MatrixXd at(double t) const;   // step evaluation, I for t <= s
};

TransitionCurve aalen_johansen(const CumulativeIntensityPath& intensity,
                               double s, bool landmarked = false);

// Marginal state occupation probabilities: the initial distribution estimate
// combined with transition probabilities from time 0. Requires someone under
// observation just after 0 (throws Error("NoInitialRiskSet") otherwise).
struct OccupationCurve {
  Weighting weighting = Weighting::AllMembers;
  int k = 0;
  std::vector<double> grid;
  Eigen::MatrixXd values;       // k x G, row j-1 = P_j(t_g)
  Eigen::VectorXd initial;      // k, P_h(0)
  double pi_hat = 1.0;

  double at(int state, double t) const;   // step evaluation
};

OccupationCurve state_occupation(const ClusteredDataset& data, Weighting w);
OccupationCurve state_occupation(const RiskPanel& panel);
OccupationCurve state_occupation(const RiskPanel& panel,
                                 const PooledPanel& pooled);

// Initial distribution P_h(0) under the panel's weighting, from pooled sums.
Eigen::VectorXd initial_distribution(const RiskPanel& panel,
                                     const PooledPanel& pooled);

// The scalar curve a TargetSpec points at, evaluated on the full panel grid.
// Shared by point estimation and bootstrap re-estimation.
Eigen::VectorXd target_curve(const RiskPanel& panel, const PooledPanel& pooled,
                             const TargetSpec& target);

}  // namespace cmsm
