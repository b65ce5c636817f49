#include "cmsm/estim.hpp"

#include <algorithm>
#include <cmath>

namespace cmsm {

Eigen::MatrixXd CumulativeIntensityPath::cumulative(double t) const {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g] > t) break;
    acc += increments[g];
  }
  return acc;
}

CumulativeIntensityPath nelson_aalen(const RiskPanel& panel) {
  return nelson_aalen(panel, panel.base);
}

CumulativeIntensityPath nelson_aalen(const RiskPanel& panel,
                                     const PooledPanel& pooled) {
  CumulativeIntensityPath path;
  path.weighting = panel.weighting;
  path.k = panel.k();
  path.grid = panel.grid;
  path.types = panel.types;
  path.increments.assign(static_cast<std::size_t>(panel.G),
                         Eigen::MatrixXd::Zero(path.k, path.k));
  for (int g = 0; g < panel.G; ++g) {
    Eigen::MatrixXd& dA = path.increments[static_cast<std::size_t>(g)];
    for (int p = 0; p < panel.P; ++p) {
      const double num = pooled.dNbar(panel.pg(p, g));
      if (num == 0.0) continue;
      const int h0 = panel.types[static_cast<std::size_t>(p)].from - 1;
      const int j0 = panel.types[static_cast<std::size_t>(p)].to - 1;
      const double den = pooled.Ybar(panel.hg(h0, g));
      const double inc = num / den;   // num > 0 forces den > 0
      dA(h0, j0) += inc;
      dA(h0, h0) -= inc;
    }
  }
  return path;
}

Eigen::MatrixXd TransitionCurve::at(double t) const {
  if (t <= s || grid.empty() || t < grid.front()) {
    return Eigen::MatrixXd::Identity(k, k);
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t g = static_cast<std::size_t>(it - grid.begin()) - 1;
  return values[g];
}

TransitionCurve aalen_johansen(const CumulativeIntensityPath& intensity,
                               double s, bool landmarked) {
  TransitionCurve curve;
  curve.s = s;
  curve.weighting = intensity.weighting;
  curve.markov_only = (s > 0.0) && !landmarked;
  curve.k = intensity.k;
  curve.grid = intensity.grid;
  const int k = curve.k;
  const std::size_t G = curve.grid.size();
  curve.values.assign(G, Eigen::MatrixXd::Identity(k, k));

  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd factor(k, k);
  for (std::size_t g = 0; g < G; ++g) {
    if (curve.grid[g] <= s) continue;
    factor = Eigen::MatrixXd::Identity(k, k) + intensity.increments[g];
    prod = prod * factor;
    for (int h = 0; h < k; ++h) {
      const double drift = std::fabs(prod.row(h).sum() - 1.0);
      if (!(drift <= 1e-12)) {
        throw Error("RowSumDrift",
                    "transition matrix row drifted by " + std::to_string(drift));
      }
    }
    curve.values[g] = prod;
  }
  return curve;
}

Eigen::VectorXd initial_distribution(const RiskPanel& panel,
                                     const PooledPanel& pooled) {
  const int k = panel.k();
  Eigen::VectorXd initial = Eigen::VectorXd::Zero(k);
  if (!(pooled.pi_hat > 0.0)) {
    throw Error("NoInitialRiskSet",
                "no transient-state member under observation just after 0");
  }
  for (int h : panel.state_space.transient()) {
    const double num = pooled.Y0w(h - 1);
    if (panel.weighting == Weighting::AllMembers) {
      initial(h - 1) = num / (pooled.pi_hat * pooled.sumUM);
    } else {
      initial(h - 1) = num / (static_cast<double>(panel.n) * pooled.pi_hat);
    }
  }
  return initial;
}

OccupationCurve state_occupation(const ClusteredDataset& data, Weighting w) {
  return state_occupation(build_panel(data, w));
}

OccupationCurve state_occupation(const RiskPanel& panel) {
  return state_occupation(panel, panel.base);
}

OccupationCurve state_occupation(const RiskPanel& panel,
                                 const PooledPanel& pooled) {
  OccupationCurve occ;
  occ.weighting = panel.weighting;
  occ.k = panel.k();
  occ.grid = panel.grid;
  occ.pi_hat = pooled.pi_hat;
  occ.initial = initial_distribution(panel, pooled);

  const CumulativeIntensityPath intensity = nelson_aalen(panel, pooled);
  const TransitionCurve curve = aalen_johansen(intensity, 0.0);
  occ.values.resize(occ.k, panel.G);
  for (int g = 0; g < panel.G; ++g) {
    occ.values.col(g) =
        curve.values[static_cast<std::size_t>(g)].transpose() * occ.initial;
  }
  return occ;
}

double OccupationCurve::at(int state, double t) const {
  if (grid.empty() || t < grid.front()) return initial(state - 1);
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t g = static_cast<std::size_t>(it - grid.begin()) - 1;
  return values(state - 1, static_cast<Eigen::Index>(g));
}

Eigen::VectorXd target_curve(const RiskPanel& panel, const PooledPanel& pooled,
                             const TargetSpec& target) {
  if (target.kind == TargetSpec::Kind::Occupation) {
    const OccupationCurve occ = state_occupation(panel, pooled);
    return occ.values.row(target.to - 1).transpose();
  }
  const CumulativeIntensityPath intensity = nelson_aalen(panel, pooled);
  const TransitionCurve curve = aalen_johansen(intensity, target.s);
  Eigen::VectorXd out(panel.G);
  for (int g = 0; g < panel.G; ++g) {
    out(g) = curve.values[static_cast<std::size_t>(g)](target.from - 1,
                                                       target.to - 1);
  }
  return out;
}

}  // namespace cmsm
