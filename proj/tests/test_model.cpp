#include <doctest.h>

#include "builders.hpp"
#include "cmsm/model.hpp"

using namespace cmsm;
using namespace tb;

namespace {

bool has_code(const ValidationReport& rep, ValidationCode code) {
  for (const auto& issue : rep.issues)
    if (issue.code == code) return true;
  return false;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("state space construction") {
  const auto ss = illness_death();
  CHECK(ss.k == 3);
  CHECK(ss.is_absorbing(3));
  CHECK(!ss.is_absorbing(2));
  CHECK(ss.is_allowed(1, 2));
  CHECK(ss.is_allowed(2, 3));
  CHECK(!ss.is_allowed(2, 1));
  CHECK(!ss.is_allowed(1, 1));
  CHECK(ss.transient() == std::vector<int>{1, 2});

  const auto full = StateSpace::all_transitions(3, {3});
  CHECK(full.is_allowed(2, 1));
  CHECK(!full.is_allowed(3, 1));
}

TEST_CASE("state_at follows the recorded path") {
  const auto p = subject("s1", 1, {{0.5, 1, 2}, {2.0, 2, 3}}, 2.0,
                         TerminusKind::Absorbed);
  CHECK(p.state_at(0.0) == 1);
  CHECK(p.state_at(0.49) == 1);
  CHECK(p.state_at(0.5) == 2);
  CHECK(p.state_at(1.9) == 2);
  CHECK(p.state_at(2.0) == 3);
  CHECK(p.state_at(5.0) == 3);
}

TEST_CASE("empty dataset and empty cluster are rejected") {
  ClusteredDataset d;
  d.state_space = survival();
  CHECK(has_code(validate_dataset(d), ValidationCode::EmptyDataset));

  d.clusters.push_back(cluster("c1", {}));
  CHECK(has_code(validate_dataset(d), ValidationCode::EmptyCluster));
}

TEST_CASE("minimal valid dataset passes and is idempotent") {
  const auto d = dataset(
      survival(),
      {cluster("c1", {subject("s1", 1, {{1.0, 1, 2}}, 1.0,
                              TerminusKind::Absorbed)}),
       cluster("c2", {subject("s1", 1, {}, 2.0, TerminusKind::Censored)})});
  CHECK(validate_dataset(d).ok());
  CHECK(validate_dataset(d).ok());
  CHECK_NOTHROW(ensure_valid(d));
  CHECK(d.n() == 2);
  CHECK(d.total_subjects() == 2);
  CHECK(d.horizon() == 2.0);
}

TEST_CASE("transition out of an absorbing state is rejected") {
  const auto d = dataset(
      illness_death(),
      {cluster("c1", {subject("s1", 1, {{1.0, 1, 3}, {2.0, 3, 2}}, 2.5,
                              TerminusKind::Censored)})});
  const auto rep = validate_dataset(d);
  CHECK(!rep.ok());
  CHECK(has_code(rep, ValidationCode::TransitionFromAbsorbing));
}

TEST_CASE("disallowed transition is rejected") {
  const auto d = dataset(
      illness_death(),
      {cluster("c1", {subject("s1", 2, {{1.0, 2, 1}}, 2.0,
                              TerminusKind::Censored)})});
  CHECK(has_code(validate_dataset(d), ValidationCode::DisallowedTransition));
}

TEST_CASE("broken chain is rejected") {
  // second record starts from state 1 although the path sits in state 2
  const auto d = dataset(
      illness_death(),
      {cluster("c1", {subject("s1", 1, {{1.0, 1, 2}, {2.0, 1, 3}}, 2.0,
                              TerminusKind::Absorbed)})});
  CHECK(has_code(validate_dataset(d), ValidationCode::BrokenChain));
}

TEST_CASE("time ordering violations are rejected") {
  // records must be strictly increasing and inside (entry, terminus]
  auto bad1 = dataset(survival(),
                      {cluster("c1", {subject("s1", 1, {{1.0, 1, 2}}, 0.5,
                                              TerminusKind::Absorbed)})});
  CHECK(has_code(validate_dataset(bad1), ValidationCode::NonMonotoneTimes));

  auto bad2 = dataset(
      illness_death(),
      {cluster("c1", {subject("s1", 1, {{1.0, 1, 2}, {1.0, 2, 3}}, 1.0,
                              TerminusKind::Absorbed)})});
  CHECK(has_code(validate_dataset(bad2), ValidationCode::NonMonotoneTimes));

  // zero-length observation window
  auto bad3 = dataset(survival(), {cluster("c1", {subject("s1", 1, {}, 0.0,
                                                          TerminusKind::Censored)})});
  CHECK(has_code(validate_dataset(bad3), ValidationCode::NonMonotoneTimes));

  // record at or before the entry time
  auto bad4 = dataset(survival(),
                      {cluster("c1", {subject("s1", 1, {{0.5, 1, 2}}, 0.5,
                                              TerminusKind::Absorbed, 0.5)})});
  CHECK(has_code(validate_dataset(bad4), ValidationCode::NonMonotoneTimes));
}

TEST_CASE("terminus consistency") {
  // absorbed terminus requires the final record to absorb at that time
  auto bad1 = dataset(survival(), {cluster("c1", {subject("s1", 1, {}, 1.0,
                                                          TerminusKind::Absorbed)})});
  CHECK(has_code(validate_dataset(bad1), ValidationCode::TerminusMismatch));

  auto bad2 = dataset(survival(),
                      {cluster("c1", {subject("s1", 1, {{1.0, 1, 2}}, 2.0,
                                              TerminusKind::Absorbed)})});
  CHECK(has_code(validate_dataset(bad2), ValidationCode::TerminusMismatch));

  // reaching an absorbing state is incompatible with a censored terminus
  auto bad3 = dataset(survival(),
                      {cluster("c1", {subject("s1", 1, {{1.0, 1, 2}}, 1.0,
                                              TerminusKind::Censored)})});
  CHECK(has_code(validate_dataset(bad3), ValidationCode::TerminusMismatch));
}

TEST_CASE("state labels out of range are rejected") {
  auto bad = dataset(survival(), {cluster("c1", {subject("s1", 3, {}, 1.0,
                                                         TerminusKind::Censored)})});
  CHECK(has_code(validate_dataset(bad), ValidationCode::StateOutOfRange));

  auto bad2 = dataset(survival(),
                      {cluster("c1", {subject("s1", 1, {{1.0, 1, 5}}, 2.0,
                                              TerminusKind::Censored)})});
  CHECK(has_code(validate_dataset(bad2), ValidationCode::StateOutOfRange));
}

TEST_CASE("duplicate identifiers are rejected") {
  auto bad = dataset(
      survival(),
      {cluster("c1", {subject("s1", 1, {}, 1.0, TerminusKind::Censored),
                      subject("s1", 1, {}, 2.0, TerminusKind::Censored)})});
  CHECK(has_code(validate_dataset(bad), ValidationCode::DuplicateId));

  auto bad2 =
      dataset(survival(),
              {cluster("c1", {subject("s1", 1, {}, 1.0, TerminusKind::Censored)}),
               cluster("c1", {subject("s1", 1, {}, 1.0, TerminusKind::Censored)})});
  CHECK(has_code(validate_dataset(bad2), ValidationCode::DuplicateId));
}

TEST_CASE("validation reports every problem at once") {
  auto bad = dataset(
      survival(),
      {cluster("c1", {subject("s1", 9, {}, 1.0, TerminusKind::Censored),
                      subject("s2", 1, {{2.0, 1, 2}}, 1.0,
                              TerminusKind::Censored)}),
       cluster("c2", {})});
  const auto rep = validate_dataset(bad);
  CHECK(rep.issues.size() >= 3);
  CHECK_THROWS_AS(ensure_valid(bad), ValidationError);
}

TEST_CASE("arm handling and split") {
  auto two = dataset(
      survival(),
      {cluster("c1",
               {subject("a", 1, {}, 1.0, TerminusKind::Censored, 0.0, 1),
                subject("b", 1, {{2.0, 1, 2}}, 2.0, TerminusKind::Absorbed,
                        0.0, 2)}),
       cluster("c2",
               {subject("a", 1, {}, 3.0, TerminusKind::Censored, 0.0, 2),
                subject("b", 1, {}, 1.5, TerminusKind::Censored, 0.0, 1)})});
  CHECK(validate_dataset(two, true).ok());

  const auto [arm1, arm2] = split_arms(two);
  CHECK(arm1.n() == 2);
  CHECK(arm2.n() == 2);
  CHECK(arm1.clusters[0].cluster_id == "c1");
  CHECK(arm2.clusters[0].cluster_id == "c1");
  CHECK(arm1.clusters[0].members.size() == 1);
  CHECK(arm1.clusters[0].members[0].subject_id == "a");
  CHECK(arm2.clusters[0].members[0].subject_id == "b");
  CHECK(arm1.clusters[1].members[0].subject_id == "b");

  // arms required but missing
  auto missing = two;
  missing.clusters[0].members[0].arm.reset();
  CHECK(has_code(validate_dataset(missing, true), ValidationCode::ArmMissing));
  CHECK(validate_dataset(missing, false).ok());

  // a cluster represented in only one arm cannot be split
  auto lopsided = two;
  lopsided.clusters[1].members[1].arm = 2;
  CHECK_THROWS_AS(split_arms(lopsided), ValidationError);
}

TEST_SUITE_END();
