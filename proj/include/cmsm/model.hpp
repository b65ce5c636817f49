#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmsm {

// Domain/runtime failure with a stable machine-readable code (e.g.
// "NoInitialRiskSet", "OutOfDomain"). CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// States are labelled 1..k throughout the public API; matrix rows and columns
// are the corresponding 0-based indices.
struct StateSpace {
  int k = 0;
  std::vector<int> absorbing;            // sorted labels
  std::vector<char> allowed;             // k*k row-major; allowed[h-1][j-1]

  static StateSpace all_transitions(int k, std::vector<int> absorbing);
  static StateSpace with_transitions(int k, std::vector<int> absorbing,
                                     const std::vector<std::pair<int, int>>& pairs);

  bool is_absorbing(int state) const;
  bool is_allowed(int from, int to) const;
  std::vector<int> transient() const;    // labels, ascending
  bool valid_label(int state) const { return state >= 1 && state <= k; }
};

struct TransitionRecord {
  double time = 0.0;
  int from = 0;
  int to = 0;
};

enum class TerminusKind { Censored, Absorbed };

// One subject's observed history: under observation on (entry_time, terminus_time],
// occupying initial_state at entry and moving through `records`.
struct SubjectPath {
  std::string subject_id;
  std::optional<int> arm;                // 1 or 2 in two-sample designs
  double entry_time = 0.0;               // left-truncation time; 0 = none
  int initial_state = 0;
  std::vector<TransitionRecord> records; // strictly increasing times
  double terminus_time = 0.0;
  TerminusKind terminus = TerminusKind::Censored;

  // State occupied at time t (right-continuous step path). Callers must ensure
  // t >= entry_time; the state after terminus_time is the last one reached.
  int state_at(double t) const;
};

struct Cluster {
  std::string cluster_id;
  std::vector<SubjectPath> members;
  int size() const { return static_cast<int>(members.size()); }
};

struct ClusteredDataset {
  StateSpace state_space;
  std::vector<Cluster> clusters;

  int n() const { return static_cast<int>(clusters.size()); }
  int total_subjects() const;
  double horizon() const;                // max terminus time over all subjects
};

enum class ValidationCode {
  EmptyDataset,
  EmptyCluster,
  DuplicateId,
  StateOutOfRange,
  NonMonotoneTimes,
  BrokenChain,
  TransitionFromAbsorbing,
  DisallowedTransition,
  TerminusMismatch,
  ArmMissing,
};

const char* to_string(ValidationCode code);

struct ValidationIssue {
  ValidationCode code;
  std::string cluster_id;
  std::string subject_id;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// Checks every structural invariant and reports all violations at once.
// Arms are only required when `require_arms` is set (two-sample analyses).
ValidationReport validate_dataset(const ClusteredDataset& data,
                                  bool require_arms = false);

// Returns `data` untouched if valid, otherwise throws ValidationError.
const ClusteredDataset& ensure_valid(const ClusteredDataset& data,
                                     bool require_arms = false);

// Splits a two-sample dataset into per-arm datasets with identical cluster
// order. Every cluster must contribute at least one member to each arm.
std::pair<ClusteredDataset, ClusteredDataset> split_arms(const ClusteredDataset& data);

}  // namespace cmsm
