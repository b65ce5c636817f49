#include "cmsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace cmsm {

StateSpace StateSpace::all_transitions(int k, std::vector<int> absorbing) {
  StateSpace s;
  s.k = k;
  std::sort(absorbing.begin(), absorbing.end());
  s.absorbing = std::move(absorbing);
  s.allowed.assign(static_cast<std::size_t>(k) * k, 0);
  for (int h = 1; h <= k; ++h) {
    if (s.is_absorbing(h)) continue;
    for (int j = 1; j <= k; ++j) {
      if (j != h) s.allowed[static_cast<std::size_t>(h - 1) * k + (j - 1)] = 1;
    }
  }
  return s;
}

StateSpace StateSpace::with_transitions(
    int k, std::vector<int> absorbing,
    const std::vector<std::pair<int, int>>& pairs) {
  StateSpace s;
  s.k = k;
  std::sort(absorbing.begin(), absorbing.end());
  s.absorbing = std::move(absorbing);
  s.allowed.assign(static_cast<std::size_t>(k) * k, 0);
  for (const auto& [h, j] : pairs) {
    if (h < 1 || h > k || j < 1 || j > k || h == j || s.is_absorbing(h)) {
      throw std::invalid_argument("StateSpace: bad transition pair");
    }
    s.allowed[static_cast<std::size_t>(h - 1) * k + (j - 1)] = 1;
  }
  return s;
}

bool StateSpace::is_absorbing(int state) const {
  return std::binary_search(absorbing.begin(), absorbing.end(), state);
}

bool StateSpace::is_allowed(int from, int to) const {
  if (!valid_label(from) || !valid_label(to) || from == to) return false;
  return allowed[static_cast<std::size_t>(from - 1) * k + (to - 1)] != 0;
}

std::vector<int> StateSpace::transient() const {
  std::vector<int> out;
  for (int h = 1; h <= k; ++h) {
    if (!is_absorbing(h)) out.push_back(h);
  }
  return out;
}

int SubjectPath::state_at(double t) const {
  int state = initial_state;
  for (const auto& rec : records) {
    if (rec.time <= t) state = rec.to; else break;
  }
  return state;
}

int ClusteredDataset::total_subjects() const {
  int total = 0;
  for (const auto& c : clusters) total += c.size();
  return total;
}

double ClusteredDataset::horizon() const {
  double tau = 0.0;
  for (const auto& c : clusters) {
    for (const auto& m : c.members) tau = std::max(tau, m.terminus_time);
  }
  return tau;
}

const char* to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::EmptyDataset: return "EmptyDataset";
    case ValidationCode::EmptyCluster: return "EmptyCluster";
    case ValidationCode::DuplicateId: return "DuplicateId";
    case ValidationCode::StateOutOfRange: return "StateOutOfRange";
    case ValidationCode::NonMonotoneTimes: return "NonMonotoneTimes";
    case ValidationCode::BrokenChain: return "BrokenChain";
    case ValidationCode::TransitionFromAbsorbing: return "TransitionFromAbsorbing";
    case ValidationCode::DisallowedTransition: return "DisallowedTransition";
    case ValidationCode::TerminusMismatch: return "TerminusMismatch";
    case ValidationCode::ArmMissing: return "ArmMissing";
  }
  return "Unknown";
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& issue : issues) {
    os << cmsm::to_string(issue.code);
    if (!issue.cluster_id.empty()) os << " cluster=" << issue.cluster_id;
    if (!issue.subject_id.empty()) os << " subject=" << issue.subject_id;
    if (!issue.detail.empty()) os << ": " << issue.detail;
    os << '\n';
  }
  return os.str();
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("dataset validation failed:\n" + report.to_string()),
      report_(std::move(report)) {}

namespace {

void check_subject(const StateSpace& ss, const Cluster& cluster,
                   const SubjectPath& subj, bool require_arms,
                   std::vector<ValidationIssue>& out) {
  auto add = [&](ValidationCode code, std::string detail) {
    out.push_back({code, cluster.cluster_id, subj.subject_id, std::move(detail)});
  };

  if (!ss.valid_label(subj.initial_state)) {
    add(ValidationCode::StateOutOfRange,
        "initial state " + std::to_string(subj.initial_state));
    return;  // further path checks would be meaningless
  }
  if (require_arms && (!subj.arm || (*subj.arm != 1 && *subj.arm != 2))) {
    add(ValidationCode::ArmMissing, "two-sample analysis needs arm 1 or 2");
  }
  if (!(subj.terminus_time > subj.entry_time)) {
    add(ValidationCode::NonMonotoneTimes,
        "terminus must exceed entry (observation window is empty)");
  }

  double prev_time = subj.entry_time;
  int prev_state = subj.initial_state;
  bool chain_ok = true;
  for (const auto& rec : subj.records) {
    if (!ss.valid_label(rec.from) || !ss.valid_label(rec.to)) {
      add(ValidationCode::StateOutOfRange,
          "transition " + std::to_string(rec.from) + "->" + std::to_string(rec.to));
      chain_ok = false;
      continue;
    }
    if (!(rec.time > prev_time)) {
      add(ValidationCode::NonMonotoneTimes,
          "transition at " + std::to_string(rec.time) +
              " does not follow " + std::to_string(prev_time));
    }
    if (rec.from != prev_state) {
      add(ValidationCode::BrokenChain,
          "transition departs state " + std::to_string(rec.from) +
              " while subject occupies " + std::to_string(prev_state));
      chain_ok = false;
    }
    if (ss.is_absorbing(rec.from)) {
      add(ValidationCode::TransitionFromAbsorbing,
          "state " + std::to_string(rec.from) + " is absorbing");
    } else if (rec.from == rec.to || !ss.is_allowed(rec.from, rec.to)) {
      add(ValidationCode::DisallowedTransition,
          std::to_string(rec.from) + "->" + std::to_string(rec.to));
    }
    prev_time = rec.time;
    prev_state = rec.to;
  }
  if (!subj.records.empty() && subj.records.back().time > subj.terminus_time) {
    add(ValidationCode::NonMonotoneTimes, "final transition after terminus");
  }

  if (chain_ok) {
    const bool ends_absorbed = ss.is_absorbing(prev_state);
    if (subj.terminus == TerminusKind::Absorbed) {
      if (!ends_absorbed) {
        add(ValidationCode::TerminusMismatch,
            "absorbed terminus but final state " + std::to_string(prev_state) +
                " is transient");
      } else if (subj.records.empty() ||
                 subj.records.back().time != subj.terminus_time) {
        add(ValidationCode::TerminusMismatch,
            "absorbed terminus time must equal the absorbing transition time");
      }
    } else if (ends_absorbed && !subj.records.empty()) {
      add(ValidationCode::TerminusMismatch,
          "path reaches an absorbing state but terminus says censored");
    }
  }
}

}  // namespace

ValidationReport validate_dataset(const ClusteredDataset& data,
                                  bool require_arms) {
  ValidationReport report;
  if (data.state_space.k < 2) {
    report.issues.push_back({ValidationCode::StateOutOfRange, "", "",
                             "state space needs at least two states"});
  }
  if (data.clusters.empty()) {
    report.issues.push_back({ValidationCode::EmptyDataset, "", "", ""});
    return report;
  }
  std::set<std::string> cluster_ids;
  for (const auto& cluster : data.clusters) {
    if (!cluster_ids.insert(cluster.cluster_id).second) {
      report.issues.push_back({ValidationCode::DuplicateId, cluster.cluster_id,
                               "", "cluster id reused"});
    }
    if (cluster.members.empty()) {
      report.issues.push_back(
          {ValidationCode::EmptyCluster, cluster.cluster_id, "", ""});
      continue;
    }
    std::set<std::string> subject_ids;
    for (const auto& subj : cluster.members) {
      if (!subject_ids.insert(subj.subject_id).second) {
        report.issues.push_back({ValidationCode::DuplicateId,
                                 cluster.cluster_id, subj.subject_id,
                                 "subject id reused within cluster"});
      }
      check_subject(data.state_space, cluster, subj, require_arms,
                    report.issues);
    }
  }
  return report;
}

const ClusteredDataset& ensure_valid(const ClusteredDataset& data,
                                     bool require_arms) {
  ValidationReport report = validate_dataset(data, require_arms);
  if (!report.ok()) throw ValidationError(std::move(report));
  return data;
}

std::pair<ClusteredDataset, ClusteredDataset> split_arms(
    const ClusteredDataset& data) {
  ValidationReport report = validate_dataset(data, /*require_arms=*/true);
  for (const auto& cluster : data.clusters) {
    bool has1 = false, has2 = false;
    for (const auto& subj : cluster.members) {
      if (subj.arm == 1) has1 = true;
      if (subj.arm == 2) has2 = true;
    }
    if (!(has1 && has2)) {
      report.issues.push_back({ValidationCode::ArmMissing, cluster.cluster_id,
                               "", "cluster must contribute both arms"});
    }
  }
  if (!report.ok()) throw ValidationError(std::move(report));

  ClusteredDataset a, b;
  a.state_space = data.state_space;
  b.state_space = data.state_space;
  for (const auto& cluster : data.clusters) {
    Cluster ca, cb;
    ca.cluster_id = cluster.cluster_id;
    cb.cluster_id = cluster.cluster_id;
    for (const auto& subj : cluster.members) {
      (subj.arm == 1 ? ca : cb).members.push_back(subj);
    }
    a.clusters.push_back(std::move(ca));
    b.clusters.push_back(std::move(cb));
  }
  return {std::move(a), std::move(b)};
}

}  // namespace cmsm
