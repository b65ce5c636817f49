#include "cmsm/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "cmsm/stats_util.hpp"

namespace cmsm {

double Transform::g(double x) const {
  switch (kind) {
    case TransformKind::Identity: return x;
    case TransformKind::LogLog: return std::log(-std::log(x));
    case TransformKind::Logit: return std::log(x / (1.0 - x));
  }
  return x;
}

double Transform::ginv(double y) const {
  switch (kind) {
    case TransformKind::Identity: return y;
    case TransformKind::LogLog: return std::exp(-std::exp(y));
    case TransformKind::Logit: return 1.0 / (1.0 + std::exp(-y));
  }
  return y;
}

double Transform::dg(double x) const {
  switch (kind) {
    case TransformKind::Identity: return 1.0;
    case TransformKind::LogLog: return 1.0 / (x * std::log(x));
    case TransformKind::Logit: return 1.0 / (x * (1.0 - x));
  }
  return 1.0;
}

bool Transform::in_domain(double x) const {
  if (kind == TransformKind::Identity) return std::isfinite(x);
  return x > 0.0 && x < 1.0;
}

PointwiseCI pointwise_ci(double est, double se, const Transform& transform,
                         double alpha) {
  PointwiseCI ci;
  if (se == 0.0) {
    ci.lower = ci.upper = est;
    ci.defined = true;
    return ci;
  }
  if (!transform.in_domain(est)) return ci;   // undefined
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double y = transform.g(est);
  const double half = z * std::fabs(transform.dg(est)) * se;
  const double a = transform.ginv(y - half);
  const double b = transform.ginv(y + half);
  ci.lower = std::min(a, b);
  ci.upper = std::max(a, b);
  ci.defined = true;
  return ci;
}

std::vector<int> band_domain(const EstimationTask& task, const BandSpec& spec) {
  const RiskPanel& panel = task.panel;
  const TargetSpec& target = task.target;
  const Transform transform{spec.transform};

  // Jump times of the transitions that move the target curve, with raw
  // multiplicity so heavy ties pull the percentile window toward them.
  std::vector<double> jumps;
  for (int p = 0; p < panel.P; ++p) {
    if (panel.types[static_cast<std::size_t>(p)].to != target.to) continue;
    for (int g = 0; g < panel.G; ++g) {
      const double t = panel.grid[static_cast<std::size_t>(g)];
      if (t <= target.s) continue;
      const int count = static_cast<int>(
          std::lround(panel.cluster_dN.col(panel.pg(p, g)).sum()));
      for (int c = 0; c < count; ++c) jumps.push_back(t);
    }
  }
  if (jumps.empty()) {
    throw Error("EmptyBandDomain", "no observed jumps move the target curve");
  }
  std::sort(jumps.begin(), jumps.end());
  const double lo = quantile_sorted(jumps, spec.lo_pct);
  const double hi = quantile_sorted(jumps, spec.hi_pct);

  std::vector<int> indices;
  for (int g = 0; g < panel.G; ++g) {
    const double t = panel.grid[static_cast<std::size_t>(g)];
    if (t < lo || t > hi) continue;
    if (!task.infl.valid[static_cast<std::size_t>(g)]) continue;
    if (!transform.in_domain(task.point(g))) continue;
    indices.push_back(g);
  }
  if (indices.empty()) {
    throw Error("EmptyBandDomain",
                "no valid grid point inside the percentile window");
  }
  return indices;
}

Band band_from_replicates(const EstimationTask& task, const ReplicateSet& reps,
                          const BandSpec& spec) {
  Band band;
  band.spec = spec;
  band.grid = task.panel.grid;
  band.indices = band_domain(task, spec);
  const Transform transform{spec.transform};

  const Eigen::VectorXd var = variance_curve(task.infl);
  const int D = static_cast<int>(band.indices.size());
  Eigen::VectorXd q(D), slope(D);
  for (int d = 0; d < D; ++d) {
    const int g = band.indices[static_cast<std::size_t>(d)];
    q(d) = 1.0 / (1.0 + var(g));
    slope(d) = std::fabs(transform.dg(task.point(g)));
  }

  std::vector<double> sups;
  sups.reserve(static_cast<std::size_t>(reps.B));
  for (int b = 0; b < reps.B; ++b) {
    bool usable = true;
    double sup = 0.0;
    for (int d = 0; d < D; ++d) {
      const int g = band.indices[static_cast<std::size_t>(d)];
      if (!reps.ok(b, g)) {
        usable = false;
        break;
      }
      sup = std::max(sup, q(d) * slope(d) * std::fabs(reps.traj(b, g)));
    }
    if (usable) sups.push_back(sup);
  }
  band.used_replicates = static_cast<int>(sups.size());
  band.dropped_replicates = reps.B - band.used_replicates;
  if (sups.empty()) {
    throw Error("NoUsableReplicates",
                "every replicate lost its risk set inside the band domain");
  }
  band.c_alpha = quantile(std::move(sups), 1.0 - spec.alpha);

  const double root_n = std::sqrt(static_cast<double>(task.panel.n));
  band.center.resize(D);
  band.lower.resize(D);
  band.upper.resize(D);
  for (int d = 0; d < D; ++d) {
    const int g = band.indices[static_cast<std::size_t>(d)];
    const double est = task.point(g);
    const double y = transform.g(est);
    const double half = band.c_alpha / (root_n * q(d));
    const double a = transform.ginv(y - half);
    const double b = transform.ginv(y + half);
    band.center(d) = est;
    band.lower(d) = std::min(a, b);
    band.upper(d) = std::max(a, b);
  }
  return band;
}

Band simultaneous_band(const EstimationTask& task, const BandSpec& spec,
                       const SeedSpec& seed, int threads) {
  const ReplicateSet reps =
      replicate_curves(task, spec.method, spec.B, seed, threads);
  return band_from_replicates(task, reps, spec);
}

bool Band::covers(const Eigen::VectorXd& truth_at_indices) const {
  for (Eigen::Index d = 0; d < truth_at_indices.size(); ++d) {
    if (truth_at_indices(d) < lower(d) || truth_at_indices(d) > upper(d)) {
      return false;
    }
  }
  return true;
}

std::vector<int> path_states(const StateSpace& ss, const TargetSpec& target) {
  const int k = ss.k;
  // reach[a][b]: a path (possibly empty) through allowed transitions
  std::vector<char> reach(static_cast<std::size_t>(k) * k, 0);
  auto at = [&](int a, int b) -> char& {
    return reach[static_cast<std::size_t>(a) * k + b];
  };
  for (int a = 0; a < k; ++a) {
    at(a, a) = 1;
    for (int b = 0; b < k; ++b) {
      if (ss.is_allowed(a + 1, b + 1)) at(a, b) = 1;
    }
  }
  for (int m = 0; m < k; ++m) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        if (at(a, m) && at(m, b)) at(a, b) = 1;
      }
    }
  }

  std::vector<int> states;
  const int j0 = target.to - 1;
  for (int d : ss.transient()) {
    const int d0 = d - 1;
    const bool to_target = at(d0, j0) != 0;
    if (target.kind == TargetSpec::Kind::Occupation) {
      if (to_target) states.push_back(d);
    } else {
      if (to_target && at(target.from - 1, d0)) states.push_back(d);
    }
  }
  return states;
}

Eigen::VectorXd make_weight(const RiskPanel& panel1, const RiskPanel& panel2,
                            WeightKind kind, const std::vector<int>& states) {
  const int G = panel1.G;
  Eigen::VectorXd W = Eigen::VectorXd::Ones(G);
  for (int g = 0; g < G; ++g) {
    double w = 1.0;
    if (kind == WeightKind::Indicator) {
      for (int l : states) {
        const double y1 = panel1.base.Ybar(panel1.hg(l - 1, g));
        const double y2 = panel2.base.Ybar(panel2.hg(l - 1, g));
        if (!(y1 > 0.0 && y2 > 0.0)) {
          w = 0.0;
          break;
        }
      }
    } else {
      double num = 1.0;
      double den = 0.0;
      for (int l : states) {
        const double a1 =
            panel1.base.Ybar(panel1.hg(l - 1, g)) / panel1.n;
        const double a2 =
            panel2.base.Ybar(panel2.hg(l - 1, g)) / panel2.n;
        num *= a1 * a2;
        den += a1 + a2;
      }
      w = den > 0.0 ? num / den : 0.0;
    }
    W(g) = w;
  }
  return W;
}

TestResult ks_two_sample(const ClusteredDataset& data, const TargetSpec& target,
                         WeightKind kind, ResampleMethod method, int B,
                         const SeedSpec& seed, bool plus_one, int threads) {
  const auto [arm1, arm2] = split_arms(data);

  std::vector<double> union_times;
  for (const auto& c : data.clusters) {
    for (const auto& m : c.members) {
      for (const auto& r : m.records) union_times.push_back(r.time);
    }
  }

  const EstimationTask task1 = make_task(arm1, target, union_times);
  const EstimationTask task2 = make_task(arm2, target, union_times);
  if (task1.panel.grid != task2.panel.grid) {
    throw Error("GridMismatch", "arms failed to align on the union grid");
  }
  const int n = task1.panel.n;
  const int G = task1.panel.G;

  const std::vector<int> states = path_states(data.state_space, target);
  if (states.empty()) {
    throw Error("EmptySupport", "no state can mediate the target");
  }

  TestResult res;
  res.target = target;
  res.weight_kind = kind;
  res.method = method;
  res.B = B;
  res.n = n;
  res.grid = task1.panel.grid;
  res.weight = make_weight(task1.panel, task2.panel, kind, states);
  res.delta = task1.point - task2.point;

  res.mask.assign(static_cast<std::size_t>(G), 0);
  bool any = false;
  for (int g = 0; g < G; ++g) {
    const bool on = res.weight(g) > 0.0 &&
                    task1.infl.valid[static_cast<std::size_t>(g)] != 0 &&
                    task2.infl.valid[static_cast<std::size_t>(g)] != 0;
    res.mask[static_cast<std::size_t>(g)] = on ? 1 : 0;
    any = any || on;
  }
  if (!any) {
    throw Error("EmptySupport", "weight and domain leave no comparison point");
  }

  double K = 0.0;
  for (int g = 0; g < G; ++g) {
    if (!res.mask[static_cast<std::size_t>(g)]) continue;
    K = std::max(K, res.weight(g) * std::fabs(res.delta(g)));
  }
  res.statistic = K;
  const double root_n = std::sqrt(static_cast<double>(n));
  res.scaled_statistic = root_n * K;

  // Null replicates; multipliers/weights are shared between the arms so the
  // within-cluster coupling survives. NaN marks a dropped replicate.
  std::vector<double> stats(static_cast<std::size_t>(B),
                            std::numeric_limits<double>::quiet_NaN());
  auto run_range = [&](int lo, int hi) {
    for (int b = lo; b < hi; ++b) {
      if (method == ResampleMethod::Multiplier) {
        Rng rng(seed, StreamTag::Multiplier, static_cast<std::uint64_t>(b));
        Eigen::VectorXd xi(n);
        for (int i = 0; i < n; ++i) xi(i) = rng.normal();
        const Eigen::VectorXd m1 = multiplier_from_xi(task1.infl, xi);
        const Eigen::VectorXd m2 = multiplier_from_xi(task2.infl, xi);
        double sup = 0.0;
        for (int g = 0; g < G; ++g) {
          if (!res.mask[static_cast<std::size_t>(g)]) continue;
          sup = std::max(sup, res.weight(g) * std::fabs(m1(g) - m2(g)));
        }
        stats[static_cast<std::size_t>(b)] = sup;
      } else {
        Rng rng(seed, StreamTag::BootstrapWeights,
                static_cast<std::uint64_t>(b));
        const auto counts = rng.multinomial_uniform(n, n);
        Eigen::VectorXd U(n);
        for (int i = 0; i < n; ++i) U(i) = counts[static_cast<std::size_t>(i)];
        const BootstrapReplicate r1 =
            bootstrap_with_weights(task1.panel, target, U);
        const BootstrapReplicate r2 =
            bootstrap_with_weights(task2.panel, target, U);
        bool usable = true;
        double sup = 0.0;
        for (int g = 0; g < G; ++g) {
          if (!res.mask[static_cast<std::size_t>(g)]) continue;
          if (!r1.valid[static_cast<std::size_t>(g)] ||
              !r2.valid[static_cast<std::size_t>(g)]) {
            usable = false;
            break;
          }
          const double dstar = r1.curve(g) - r2.curve(g);
          sup = std::max(sup,
                         res.weight(g) * std::fabs(dstar - res.delta(g)));
        }
        if (usable) stats[static_cast<std::size_t>(b)] = root_n * sup;
      }
    }
  };

  if (threads <= 1 || B < 2 * threads) {
    run_range(0, B);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (B + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(B, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  int used = 0, exceed = 0;
  for (double s : stats) {
    if (std::isnan(s)) continue;
    ++used;
    if (s >= res.scaled_statistic) ++exceed;
  }
  res.used_replicates = used;
  res.dropped_replicates = B - used;
  if (used == 0) {
    throw Error("NoUsableReplicates", "every null replicate was dropped");
  }
  res.p_value = plus_one
                    ? (static_cast<double>(exceed) + 1.0) /
                          (static_cast<double>(used) + 1.0)
                    : static_cast<double>(exceed) / static_cast<double>(used);
  return res;
}

}  // namespace cmsm
