#include "cmsm/resample.hpp"

#include <cmath>
#include <thread>

namespace cmsm {

EstimationTask make_task(const ClusteredDataset& data, const TargetSpec& target,
                         std::span<const double> extra_times) {
  EstimationTask task;
  task.target = target;
  task.panel = build_panel(data, target.weighting, extra_times);
  task.intensity = nelson_aalen(task.panel);
  task.point = target_curve(task.panel, task.panel.base, target);
  if (target.kind == TargetSpec::Kind::Transition) {
    task.infl = transition_influence(task.panel, task.intensity, target.s,
                                     target.from, target.to);
  } else {
    task.infl = occupation_influence(task.panel, task.intensity, target.to);
  }
  return task;
}

Eigen::VectorXd multiplier_from_xi(const InfluenceSet& infl,
                                   const Eigen::VectorXd& xi) {
  return infl.values.transpose() * xi /
         std::sqrt(static_cast<double>(infl.n));
}

Eigen::VectorXd multiplier_draw(const InfluenceSet& infl, const SeedSpec& seed,
                                std::uint64_t index) {
  Rng rng(seed, StreamTag::Multiplier, index);
  Eigen::VectorXd xi(infl.n);
  for (int i = 0; i < infl.n; ++i) xi(i) = rng.normal();
  return multiplier_from_xi(infl, xi);
}

BootstrapReplicate bootstrap_with_weights(const RiskPanel& panel,
                                          const TargetSpec& target,
                                          const Eigen::VectorXd& U) {
  BootstrapReplicate rep;
  rep.weights = U;
  rep.valid.assign(static_cast<std::size_t>(panel.G), 0);
  const PooledPanel pooled = pool_panel(panel, U);

  // Occupation targets need initial mass in the replicate.
  if (target.kind == TargetSpec::Kind::Occupation && !(pooled.pi_hat > 0.0)) {
    rep.curve = Eigen::VectorXd::Zero(panel.G);
    return rep;
  }
  rep.curve = target_curve(panel, pooled, target);

  // Cumulative rule: once a grid point with original events loses its
  // replicate risk set, everything from that point on is unusable.
  bool dead = false;
  for (int g = 0; g < panel.G; ++g) {
    if (!dead && panel.grid[static_cast<std::size_t>(g)] > target.s) {
      for (int p = 0; p < panel.P; ++p) {
        if (panel.base.dNbar(panel.pg(p, g)) <= 0.0) continue;
        const int l0 = panel.types[static_cast<std::size_t>(p)].from - 1;
        if (!(pooled.Ybar(panel.hg(l0, g)) > 0.0)) {
          dead = true;
          break;
        }
      }
    }
    rep.valid[static_cast<std::size_t>(g)] = dead ? 0 : 1;
  }
  return rep;
}

BootstrapReplicate cluster_bootstrap_draw(const RiskPanel& panel,
                                          const TargetSpec& target,
                                          const SeedSpec& seed,
                                          std::uint64_t index) {
  Rng rng(seed, StreamTag::BootstrapWeights, index);
  const auto counts = rng.multinomial_uniform(panel.n, panel.n);
  Eigen::VectorXd U(panel.n);
  for (int i = 0; i < panel.n; ++i) {
    U(i) = counts[static_cast<std::size_t>(i)];
  }
  return bootstrap_with_weights(panel, target, U);
}

ReplicateSet replicate_curves(const EstimationTask& task, ResampleMethod method,
                              int B, const SeedSpec& seed, int threads) {
  const int G = task.panel.G;
  ReplicateSet out;
  out.method = method;
  out.B = B;
  out.n = task.panel.n;
  out.grid = task.panel.grid;
  out.traj.setZero(B, G);
  out.valid.assign(static_cast<std::size_t>(B) * G, 0);
  out.seed = seed;

  const double root_n = std::sqrt(static_cast<double>(task.panel.n));
  auto run_range = [&](int lo, int hi) {
    for (int b = lo; b < hi; ++b) {
      if (method == ResampleMethod::Multiplier) {
        out.traj.row(b) = multiplier_draw(task.infl, seed,
                                          static_cast<std::uint64_t>(b))
                              .transpose();
        for (int g = 0; g < G; ++g) {
          out.valid[static_cast<std::size_t>(b) * G + g] =
              task.infl.valid[static_cast<std::size_t>(g)];
        }
      } else {
        const BootstrapReplicate rep = cluster_bootstrap_draw(
            task.panel, task.target, seed, static_cast<std::uint64_t>(b));
        out.traj.row(b) = (root_n * (rep.curve - task.point)).transpose();
        for (int g = 0; g < G; ++g) {
          out.valid[static_cast<std::size_t>(b) * G + g] =
              rep.valid[static_cast<std::size_t>(g)];
        }
      }
    }
  };

  if (threads <= 1 || B < 2 * threads) {
    run_range(0, B);
    return out;
  }
  std::vector<std::thread> pool;
  const int chunk = (B + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(B, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(run_range, lo, hi);
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace cmsm
