#include "cmsm/panel.hpp"

#include <algorithm>
#include <map>

namespace cmsm {

int RiskPanel::type_index(int from, int to) const {
  for (int p = 0; p < P; ++p) {
    if (types[p].from == from && types[p].to == to) return p;
  }
  return -1;
}

int RiskPanel::index_at(double t) const {
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  return static_cast<int>(it - grid.begin()) - 1;
}

RiskPanel build_panel(const ClusteredDataset& data, Weighting weighting,
                      std::span<const double> extra_times) {
  ensure_valid(data);

  RiskPanel panel;
  panel.state_space = data.state_space;
  panel.weighting = weighting;
  panel.n = data.n();
  panel.tau = data.horizon();

  // Grid: distinct event times (ties share a point), plus aligned extras.
  std::vector<double>& grid = panel.grid;
  for (const auto& cluster : data.clusters) {
    for (const auto& subj : cluster.members) {
      for (const auto& rec : subj.records) grid.push_back(rec.time);
    }
  }
  grid.insert(grid.end(), extra_times.begin(), extra_times.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  panel.G = static_cast<int>(grid.size());

  std::map<std::pair<int, int>, int> type_of;
  for (const auto& cluster : data.clusters) {
    for (const auto& subj : cluster.members) {
      for (const auto& rec : subj.records) {
        type_of.emplace(std::make_pair(rec.from, rec.to), 0);
      }
    }
  }
  for (auto& [pair, idx] : type_of) {
    idx = panel.P++;
    panel.types.push_back({pair.first, pair.second});
  }

  const int n = panel.n, G = panel.G, k = panel.k();
  panel.cluster_dN = Eigen::MatrixXd::Zero(n, panel.P * G);
  panel.cluster_Y = Eigen::MatrixXd::Zero(n, k * G);
  panel.Y0 = Eigen::MatrixXd::Zero(n, k);
  panel.w = Eigen::VectorXd::Ones(n);
  panel.M = Eigen::VectorXd::Zero(n);

  // first grid index with grid[idx] > t
  auto first_after = [&](double t) {
    return static_cast<int>(std::upper_bound(grid.begin(), grid.end(), t) -
                            grid.begin());
  };

  for (int i = 0; i < n; ++i) {
    const Cluster& cluster = data.clusters[static_cast<std::size_t>(i)];
    panel.M(i) = cluster.size();
    if (weighting == Weighting::TypicalMember) {
      panel.w(i) = 1.0 / panel.M(i);
    }
    for (const auto& subj : cluster.members) {
      if (subj.entry_time == 0.0) panel.Y0(i, subj.initial_state - 1) += 1.0;

      // At-risk: for each sojourn (a, b] in state sigma, mark grid points.
      double a = subj.entry_time;
      int sigma = subj.initial_state;
      auto mark = [&](double lo, double hi, int state) {
        const int g_lo = first_after(lo);
        const int g_hi = first_after(hi);  // exclusive
        for (int g = g_lo; g < g_hi; ++g) {
          panel.cluster_Y(i, panel.hg(state - 1, g)) += 1.0;
        }
      };
      for (const auto& rec : subj.records) {
        mark(a, rec.time, sigma);
        const int g = panel.index_at(rec.time);
        const int p = type_of.at({rec.from, rec.to});
        panel.cluster_dN(i, panel.pg(p, g)) += 1.0;
        a = rec.time;
        sigma = rec.to;
      }
      mark(a, subj.terminus_time, sigma);
    }
  }

  panel.base = pool_panel(panel);
  return panel;
}

PooledPanel pool_panel(const RiskPanel& panel) {
  return pool_panel(panel, Eigen::VectorXd::Ones(panel.n));
}

PooledPanel pool_panel(const RiskPanel& panel, const Eigen::VectorXd& U) {
  PooledPanel out;
  const Eigen::VectorXd uw = U.cwiseProduct(panel.w);
  out.dNbar = panel.cluster_dN.transpose() * uw;
  out.Ybar = panel.cluster_Y.transpose() * uw;
  out.Y0w = panel.Y0.transpose() * uw;
  out.sumUM = U.dot(panel.M);
  out.n = U.sum();
  Eigen::VectorXd y0_transient = Eigen::VectorXd::Zero(panel.n);
  for (int h : panel.state_space.transient()) {
    y0_transient += panel.Y0.col(h - 1);
  }
  out.pi_hat = U.cwiseQuotient(panel.M).dot(y0_transient) / panel.n;
  return out;
}

std::vector<char> domain_flags(const RiskPanel& panel, double s) {
  const int G = panel.G, k = panel.k();
  std::vector<char> valid(static_cast<std::size_t>(G), 0);
  std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
  std::vector<char> transient(static_cast<std::size_t>(k), 0);
  for (int h : panel.state_space.transient()) {
    transient[static_cast<std::size_t>(h - 1)] = 1;
  }
  for (int g = 0; g < G; ++g) {
    if (panel.grid[static_cast<std::size_t>(g)] <= s) continue;
    for (int p = 0; p < panel.P; ++p) {
      mass[static_cast<std::size_t>(panel.types[static_cast<std::size_t>(p)].from - 1)] +=
          panel.base.dNbar(panel.pg(p, g));
    }
    bool ok = true;
    for (int h0 = 0; h0 < k; ++h0) {
      if (!transient[static_cast<std::size_t>(h0)]) continue;
      if (mass[static_cast<std::size_t>(h0)] > 0.0 &&
          !(panel.base.Ybar(panel.hg(h0, g)) > 0.0)) {
        ok = false;
        break;
      }
    }
    valid[static_cast<std::size_t>(g)] = ok ? 1 : 0;
  }
  return valid;
}

ClusteredDataset landmark_restrict(const ClusteredDataset& data,
                                   const LandmarkSpec& spec) {
  ensure_valid(data);
  if (!data.state_space.valid_label(spec.state)) {
    throw Error("StateOutOfRange", "landmark state out of range");
  }
  if (spec.s < 0.0) {
    throw Error("NonMonotoneTimes", "landmark time must be nonnegative");
  }

  ClusteredDataset out;
  out.state_space = data.state_space;
  for (const auto& cluster : data.clusters) {
    Cluster kept;
    kept.cluster_id = cluster.cluster_id;
    for (const auto& subj : cluster.members) {
      if (subj.entry_time > spec.s) continue;             // enters later
      if (!(subj.terminus_time > spec.s)) continue;       // not under observation
      if (subj.state_at(spec.s) != spec.state) continue;
      SubjectPath path;
      path.subject_id = subj.subject_id;
      path.arm = subj.arm;
      path.entry_time = spec.s;
      path.initial_state = spec.state;
      for (const auto& rec : subj.records) {
        if (rec.time > spec.s) path.records.push_back(rec);
      }
      path.terminus_time = subj.terminus_time;
      path.terminus = subj.terminus;
      kept.members.push_back(std::move(path));
    }
    if (!kept.members.empty()) out.clusters.push_back(std::move(kept));
  }
  if (out.clusters.empty()) {
    throw Error("NoSubjectsAtLandmark",
                "no subject occupies state " + std::to_string(spec.state) +
                    " under observation at s=" + std::to_string(spec.s));
  }
  return out;
}

}  // namespace cmsm
