#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cal/maxplus.hpp"
#include "cal/model.hpp"

namespace cal {

struct DeadlineVerdict {
  std::string node;
  TimeValue deadline;
  /// Worst-case lateness at this node: the largest per-channel latency
  /// assumption net of tolerated inconsistency, plus the node's own
  /// execution time.
  TimeValue bound;
  bool pass = false;
};

struct PeriodCheck {
  std::string node;
  TimeValue period;
  TimeValue unavailability;
  bool pass = false;
};

struct BudgetRow {
  std::string from;
  TimeValue deadline;
  TimeValue logical_delay;
  TimeValue assumed_latency;  // declared exec + net + clock_err
  TimeValue slack;            // deadline - local_exec - (assumed - delay)
  TimeValue max_admissible;   // deadline - local_exec + delay
};

/// Everything the analysis derives from a model: the latency matrix, its
/// transitive closure, the least processing offsets, the per-node
/// unavailability bounds, and requirement verdicts.
struct AnalysisReport {
  std::vector<std::string> node_ids;
  mp::Matrix gamma;
  std::optional<mp::Matrix> star;  // absent when the closure diverges
  mp::CycleClass cycle_class = mp::CycleClass::AllNegative;
  mp::Vector offsets;
  mp::Vector unavailability;
  /// True when offsets came from the periodic-source refinement rather
  /// than the conservative fixpoint.
  bool refined = false;
  std::vector<DeadlineVerdict> deadline_verdicts;
  std::vector<PeriodCheck> period_checks;
  std::vector<std::string> notes;

  /// Offsets diverged: every node would wait forever.
  bool offsets_unbounded() const;
  bool all_deadlines_pass() const;
  bool all_period_checks_pass() const;
};

/// The per-edge wait matrix: entry (i, j) is the latency assumption of
/// the logical channel j -> i (exec + net + clock_err) minus its logical
/// delay; 0 on the diagonal; -inf where j does not reach i logically.
/// Physical channels impose no tag-order wait and contribute -inf.
mp::Matrix build_gamma(const ProgramModel& m);

/// Least nonnegative offsets satisfying O = Z + gamma*O (max-plus), via
/// the transitive closure. When some cycle has positive weight there is
/// no finite solution and every offset is +inf.
struct OffsetSolution {
  mp::Vector offsets;
  mp::CycleClass cycle_class;
  std::optional<mp::Matrix> star;
};

OffsetSolution solve_offsets(const mp::Matrix& gamma);

/// Refined offsets for models whose sources are periodic: a periodic
/// source that keeps up with its own period waits on nothing, and every
/// other node waits only on its direct inputs. Requires at least one
/// node flagged periodic_source and identical timers on all of them;
/// throws AssumptionUnverifiable otherwise. Non-source offsets are
/// clamped below at zero (logical time never runs ahead of the clock).
mp::Vector refine_offsets_periodic(const ProgramModel& m, const mp::Matrix& gamma);

/// Unavailability vector (I + gamma) * offsets in max-plus.
mp::Vector solve_unavailability(const mp::Matrix& gamma, const mp::Vector& offsets);

/// The periodic-source premise holds only if each source's period
/// exceeds its unavailability; one verdict per flagged node.
std::vector<PeriodCheck> check_source_periods(const ProgramModel& m, const mp::Vector& unavailability);

/// One verdict per node with a deadline.
std::vector<DeadlineVerdict> check_deadlines(const ProgramModel& m, const mp::Matrix& gamma);

/// Per-channel latency slack for the target node's deadline; throws
/// NoDeadline when the target declares none.
std::vector<BudgetRow> solve_budget(const ProgramModel& m, const std::string& target_node);

/// Full pipeline: gamma, offsets (refined when the model flags periodic
/// sources), unavailability, deadline verdicts, period checks, notes.
AnalysisReport analyze(const ProgramModel& m);

}  // namespace cal
