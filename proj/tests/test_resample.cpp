#include <doctest.h>

#include <cmath>
#include <vector>

#include "builders.hpp"
#include "cmsm/resample.hpp"
#include "cmsm/rng.hpp"

using namespace cmsm;
using namespace tb;

namespace {

ClusteredDataset moderate_data(std::uint64_t seed) {
  Rng rng(seed);
  tb::RandomDataOpts opts;
  opts.min_clusters = 8;
  opts.max_clusters = 12;
  opts.max_size = 3;
  return random_dataset(rng, opts);
}

}  // namespace

TEST_SUITE_BEGIN("resample");

TEST_CASE("make_task assembles a consistent bundle") {
  const auto d = moderate_data(11);
  const auto occ = make_task(d, TargetSpec::occupation(2, Weighting::TypicalMember));
  CHECK(occ.panel.G == static_cast<int>(occ.panel.grid.size()));
  CHECK(occ.point.size() == occ.panel.G);
  CHECK(occ.infl.values.rows() == occ.panel.n);
  CHECK(occ.infl.values.cols() == occ.panel.G);
  CHECK(occ.infl.grid == occ.panel.grid);

  const auto tr = make_task(
      d, TargetSpec::transition(1, 3, 0.0, Weighting::AllMembers));
  CHECK(tr.panel.weighting == Weighting::AllMembers);
  CHECK(tr.point.size() == tr.panel.G);

  const std::vector<double> extra{0.123, 9.5};
  const auto wide = make_task(
      d, TargetSpec::occupation(2, Weighting::TypicalMember), extra);
  CHECK(wide.panel.G >= occ.panel.G + 2);
}

TEST_CASE("multiplier realizations") {
  const auto d = moderate_data(22);
  const auto task = make_task(d, TargetSpec::occupation(2, Weighting::TypicalMember));
  const int n = task.panel.n;

  SUBCASE("zero multipliers vanish; constant multipliers hit the row-sum") {
    CHECK(multiplier_from_xi(task.infl, Eigen::VectorXd::Zero(n)).isZero(0.0));
    const auto ones = multiplier_from_xi(task.infl, Eigen::VectorXd::Ones(n));
    CHECK(ones.cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("linear in the multipliers") {
    SeedSpec spec{909};
    Rng rng(spec, StreamTag::Generic, 0);
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi(i) = rng.normal();
    const Eigen::VectorXd one = multiplier_from_xi(task.infl, xi);
    const Eigen::VectorXd two = multiplier_from_xi(task.infl, (2.0 * xi).eval());
    CHECK(two == 2.0 * one);
  }

  SUBCASE("draws are addressed by (seed, index)") {
    SeedSpec spec{4242};
    const auto a = multiplier_draw(task.infl, spec, 3);
    const auto b = multiplier_draw(task.infl, spec, 3);
    CHECK(a == b);
    const auto c = multiplier_draw(task.infl, spec, 4);
    CHECK(a != c);
  }
}

TEST_CASE("bootstrap re-estimation") {
  const auto d = moderate_data(33);
  const auto task = make_task(d, TargetSpec::occupation(2, Weighting::TypicalMember));
  const int n = task.panel.n;

  SUBCASE("unit weights reproduce the point estimate exactly") {
    const auto rep = bootstrap_with_weights(task.panel, task.target,
                                            Eigen::VectorXd::Ones(n));
    CHECK(rep.curve == task.point);
    for (char v : rep.valid) CHECK(v == 1);
  }

  SUBCASE("draws are deterministic and conserve the cluster count") {
    SeedSpec spec{515151};
    const auto a = cluster_bootstrap_draw(task.panel, task.target, spec, 0);
    const auto b = cluster_bootstrap_draw(task.panel, task.target, spec, 0);
    CHECK(a.weights == b.weights);
    CHECK(a.curve == b.curve);
    CHECK(a.weights.sum() == static_cast<double>(n));
    CHECK(a.weights.minCoeff() >= 0.0);
    // occupation estimates stay probabilities
    CHECK(a.curve.minCoeff() >= -1e-12);
    CHECK(a.curve.maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("bootstrap validity bookkeeping") {
  // c2 holds the only early transition; deleting c1 kills the late risk set
  const auto d = dataset(
      illness_death(),
      {cluster("c1", {subject("s", 1, {{1.0, 1, 2}}, 2.0,
                              TerminusKind::Censored)}),
       cluster("c2", {subject("s", 1, {{0.5, 1, 2}}, 3.0,
                              TerminusKind::Censored)})});
  const auto task = make_task(d, TargetSpec::occupation(2, Weighting::AllMembers));

  Eigen::VectorXd keep_c1(2), keep_c2(2);
  keep_c1 << 2.0, 0.0;
  keep_c2 << 0.0, 2.0;

  const auto alive = bootstrap_with_weights(task.panel, task.target, keep_c1);
  CHECK(alive.valid == std::vector<char>{1, 1});

  const auto dead = bootstrap_with_weights(task.panel, task.target, keep_c2);
  // at t=1.0 the original event's risk set is empty in the replicate
  CHECK(dead.valid == std::vector<char>{1, 0});
  CHECK(dead.curve(0) == 1.0);

  SUBCASE("losing all initial mass invalidates the whole replicate") {
    const auto trunc = dataset(
        illness_death(),
        {cluster("c1", {subject("s", 1, {{1.0, 1, 2}}, 2.0,
                                TerminusKind::Censored)}),
         cluster("c2", {subject("s", 1, {}, 3.0, TerminusKind::Censored,
                                0.5)})});
    const auto t2 = make_task(trunc, TargetSpec::occupation(2, Weighting::AllMembers));
    Eigen::VectorXd U(2);
    U << 0.0, 2.0;   // only the late-entry cluster survives
    const auto rep = bootstrap_with_weights(t2.panel, t2.target, U);
    CHECK(rep.valid == std::vector<char>{0});
    CHECK(rep.curve.isZero(0.0));
  }
}

TEST_CASE("replicate trajectories") {
  const auto d = moderate_data(44);
  const auto task = make_task(d, TargetSpec::occupation(2, Weighting::TypicalMember));
  SeedSpec spec{777001};
  const int B = 24;

  for (const auto method :
       {ResampleMethod::Multiplier, ResampleMethod::ClusterBootstrap}) {
    const auto reps = replicate_curves(task, method, B, spec);
    CHECK(reps.B == B);
    CHECK(reps.traj.rows() == B);
    CHECK(reps.traj.cols() == task.panel.G);

    // row b is the addressed draw, independent of batch execution
    if (method == ResampleMethod::Multiplier) {
      const auto one = multiplier_draw(task.infl, spec, 7);
      CHECK(reps.traj.row(7).transpose() == one);
    } else {
      const auto one = cluster_bootstrap_draw(task.panel, task.target, spec, 7);
      const double root_n = std::sqrt(static_cast<double>(task.panel.n));
      CHECK(reps.traj.row(7).transpose() ==
            root_n * (one.curve - task.point));
    }

    // threading must not change a single bit
    const auto threaded = replicate_curves(task, method, B, spec, 3);
    CHECK(threaded.traj == reps.traj);
    CHECK(threaded.valid == reps.valid);

    const auto reseeded = replicate_curves(task, method, B, SeedSpec{2}, 1);
    CHECK(reseeded.traj != reps.traj);
  }
}

TEST_SUITE_END();
