#include "cmsm/infl.hpp"

#include <algorithm>
#include <cmath>

namespace cmsm {

namespace {

// Accumulates the per-cluster influence matrices
//   H_i(t) = sum_{s < u <= t} P(s, u-) dPhi_i(u) P(u, t)
// over the grid, where dPhi_i(u) carries the scaled martingale-residual
// increments n * w_i (dN_{i,lq}(u) - Y_{i,l}(u) dA_lq(u)) / Ybar_l(u) in cell
// (l, q) and the negative row sum on the diagonal. Uses the recursion
//   H_i(t_g) = H_i(t_{g-1}) (I + dA(t_g)) + P(s, t_g-) dPhi_i(t_g),
// so no transition matrix is ever inverted. After processing grid point g the
// rows of `extract` receive the requested entries of H_i(t_g).
//
// extract(H_all, g): H_all is (n*k) x k, cluster i in rows [i*k, i*k+k).
template <typename Extract>
void accumulate_influence(const RiskPanel& panel,
                          const CumulativeIntensityPath& intensity, double s,
                          Extract&& extract) {
  const int n = panel.n, k = panel.k(), G = panel.G;
  const PooledPanel& pooled = panel.base;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n * k, k);
  Eigen::MatrixXd pre = Eigen::MatrixXd::Identity(k, k);   // P(s, t_{g-1})
  Eigen::MatrixXd factor(k, k);

  for (int g = 0; g < G; ++g) {
    if (panel.grid[static_cast<std::size_t>(g)] <= s) {
      extract(H, g);
      continue;
    }
    const Eigen::MatrixXd& dA = intensity.increments[static_cast<std::size_t>(g)];
    factor = Eigen::MatrixXd::Identity(k, k) + dA;
    H *= factor;
    for (int p = 0; p < panel.P; ++p) {
      if (pooled.dNbar(panel.pg(p, g)) == 0.0) continue;
      const int l0 = panel.types[static_cast<std::size_t>(p)].from - 1;
      const int q0 = panel.types[static_cast<std::size_t>(p)].to - 1;
      const double da = dA(l0, q0);
      const double ybar = pooled.Ybar(panel.hg(l0, g));
      const double scale = static_cast<double>(n) / ybar;
      for (int i = 0; i < n; ++i) {
        const double resid =
            panel.w(i) * (panel.cluster_dN(i, panel.pg(p, g)) -
                          panel.cluster_Y(i, panel.hg(l0, g)) * da);
        if (resid == 0.0) continue;
        const double v = scale * resid;
        H.col(q0).segment(i * k, k) += v * pre.col(l0);
        H.col(l0).segment(i * k, k) -= v * pre.col(l0);
      }
    }
    pre *= factor;
    extract(H, g);
  }
}

void require_support(const std::vector<char>& valid) {
  if (std::none_of(valid.begin(), valid.end(), [](char c) { return c != 0; })) {
    throw Error("EmptySupport", "no grid point lies in the valid domain");
  }
}

}  // namespace

int InfluenceSet::index_at(double t) const {
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  return static_cast<int>(it - grid.begin()) - 1;
}

InfluenceSet transition_influence(const RiskPanel& panel,
                                  const CumulativeIntensityPath& intensity,
                                  double s, int from, int to) {
  InfluenceSet out;
  out.target = TargetSpec::transition(from, to, s, panel.weighting);
  out.n = panel.n;
  out.grid = panel.grid;
  out.valid = domain_flags(panel, s);
  require_support(out.valid);
  out.values.setZero(panel.n, panel.G);

  const int k = panel.k();
  const int h0 = from - 1, j0 = to - 1;
  accumulate_influence(panel, intensity, s,
                       [&](const Eigen::MatrixXd& H, int g) {
                         for (int i = 0; i < panel.n; ++i) {
                           out.values(i, g) = H(i * k + h0, j0);
                         }
                       });
  return out;
}

InfluenceSet occupation_influence(const RiskPanel& panel,
                                  const CumulativeIntensityPath& intensity,
                                  int state) {
  InfluenceSet out;
  out.target = TargetSpec::occupation(state, panel.weighting);
  out.n = panel.n;
  out.grid = panel.grid;
  out.valid = domain_flags(panel, 0.0);
  require_support(out.valid);
  out.values.setZero(panel.n, panel.G);

  const int n = panel.n, k = panel.k(), j0 = state - 1;
  const PooledPanel& pooled = panel.base;
  const Eigen::VectorXd initial = initial_distribution(panel, pooled);
  const TransitionCurve curve = aalen_johansen(intensity, 0.0);
  const std::vector<int> transient = panel.state_space.transient();

  // Time-constant residuals from the initial distribution, cluster size, and
  // the initial risk total; one coefficient per (cluster, source state).
  Eigen::MatrixXd resid(n, static_cast<int>(transient.size()));
  Eigen::VectorXd y0_transient = Eigen::VectorXd::Zero(n);
  for (int h : transient) y0_transient += panel.Y0.col(h - 1);
  const double pi_hat = pooled.pi_hat;
  if (panel.weighting == Weighting::AllMembers) {
    const double mbar = panel.M.sum() / n;
    for (std::size_t a = 0; a < transient.size(); ++a) {
      const int h0 = transient[a] - 1;
      const double ybar0 = panel.Y0.col(h0).sum() / n;
      for (int i = 0; i < n; ++i) {
        const double size_term = (panel.M(i) - mbar) / mbar;
        const double pi_term = (y0_transient(i) / panel.M(i) - pi_hat) / pi_hat;
        resid(i, static_cast<int>(a)) =
            (panel.Y0(i, h0) - ybar0) / (pi_hat * mbar) -
            initial(h0) * (size_term + pi_term);
      }
    }
  } else {
    for (std::size_t a = 0; a < transient.size(); ++a) {
      const int h0 = transient[a] - 1;
      const double avg = panel.Y0.col(h0).cwiseQuotient(panel.M).sum() / n;
      for (int i = 0; i < n; ++i) {
        const double own = panel.Y0(i, h0) / panel.M(i);
        const double pi_term = y0_transient(i) / panel.M(i) - pi_hat;
        resid(i, static_cast<int>(a)) =
            (own - avg - initial(h0) * pi_term) / pi_hat;
      }
    }
  }

  accumulate_influence(
      panel, intensity, 0.0, [&](const Eigen::MatrixXd& H, int g) {
        for (int i = 0; i < n; ++i) {
          double psi = 0.0;
          for (std::size_t a = 0; a < transient.size(); ++a) {
            const int h0 = transient[a] - 1;
            psi += initial(h0) * H(i * k + h0, j0);
            psi += curve.values[static_cast<std::size_t>(g)](h0, j0) *
                   resid(i, static_cast<int>(a));
          }
          out.values(i, g) = psi;
        }
      });
  return out;
}

double CovarianceEstimate::se() const {
  return std::sqrt(value / static_cast<double>(n));
}

CovarianceEstimate covariance_at(const InfluenceSet& infl, double t1,
                                 double t2) {
  CovarianceEstimate cov;
  cov.t1 = t1;
  cov.t2 = t2;
  cov.n = infl.n;
  const int g1 = infl.index_at(t1);
  const int g2 = infl.index_at(t2);
  if (g1 < 0 || g2 < 0) {
    // before the first event the influence is identically zero
    if (g1 >= 0 && !infl.valid[static_cast<std::size_t>(g1)]) {
      throw Error("OutOfDomain", "time lies outside the valid domain");
    }
    if (g2 >= 0 && !infl.valid[static_cast<std::size_t>(g2)]) {
      throw Error("OutOfDomain", "time lies outside the valid domain");
    }
    cov.value = 0.0;
    return cov;
  }
  if (!infl.valid[static_cast<std::size_t>(g1)] ||
      !infl.valid[static_cast<std::size_t>(g2)]) {
    throw Error("OutOfDomain", "time lies outside the valid domain");
  }
  cov.value = infl.values.col(g1).dot(infl.values.col(g2)) /
              static_cast<double>(infl.n);
  return cov;
}

Eigen::VectorXd variance_curve(const InfluenceSet& infl) {
  return infl.values.colwise().squaredNorm().transpose() /
         static_cast<double>(infl.n);
}

Eigen::VectorXd se_curve(const InfluenceSet& infl) {
  return (variance_curve(infl) / static_cast<double>(infl.n)).cwiseSqrt();
}

}  // namespace cmsm
