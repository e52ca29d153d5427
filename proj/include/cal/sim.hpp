#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cal/model.hpp"
#include "cal/time.hpp"
#include "cal/trace.hpp"

namespace cal {

/// Per-channel network behavior for one run. Draws are deterministic in
/// (seed, channel, message index), so adding channels or scenarios never
/// perturbs existing draws.
struct LatencySpec {
  enum class Kind { Constant, Uniform, SpikeWindow, PartitionWindow };
  Kind kind = Kind::Constant;
  TimeValue value;              // Constant
  TimeValue lo, hi;             // Uniform, inclusive bounds
  TimeValue base, spike;        // SpikeWindow
  TimeValue from, to;           // window for SpikeWindow / PartitionWindow
};

struct ChannelScenario {
  std::string from;
  std::string to;
  LatencySpec latency;
};

struct Stimulus {
  std::string node;
  TimeValue at;  // arrival instant on the engine's reference clock
};

/// One concrete run configuration: the realized execution times, clock
/// offsets, network latencies, and external inputs the analysis only
/// bounds. A channel without an entry in `latencies` delivers instantly.
struct Scenario {
  std::uint64_t seed = 0;
  TimeValue horizon;
  std::vector<ChannelScenario> latencies;
  std::map<std::string, TimeValue> clock_offsets;
  std::map<std::string, TimeValue> exec_times;
  std::vector<Stimulus> stimuli;
  /// When false (default) coordination grants travel through the same
  /// latency model as data on their channel; when true they arrive
  /// instantly.
  bool ideal_grants = false;
};

std::vector<Diagnostic> validate_scenario(const Scenario& s, const ProgramModel& m);

Scenario parse_scenario(const std::string& document);

enum class CoordinatorKind { Centralized, Decentralized };

enum class FaultKind { DeadlineMiss, TardyMessage };

std::string to_string(FaultKind k);

struct FaultEvent {
  std::string node;
  FaultKind kind;
  Tag tag;
  TimeValue physical;  // local clock when the fault was detected
  std::string detail;
};

struct NodeStats {
  std::string node;
  TimeValue unavailability;
  TimeValue processing_offset;
};

struct ChannelStats {
  std::string from;
  std::string to;
  TimeValue apparent_latency;
  TimeValue inconsistency;
};

struct SimOutcome {
  Trace trace;
  std::vector<FaultEvent> fault_events;
  std::vector<NodeStats> node_stats;        // one per model node
  std::vector<ChannelStats> channel_stats;  // one per logical channel
  std::uint64_t deadline_miss_count = 0;
  std::uint64_t tardy_count = 0;
};

/// Deterministic discrete-event simulation of a federated execution.
///
/// Under centralized coordination an idealized runtime authority keeps
/// every node processing in tag order: a node handles an event with tag
/// g only after its local clock reaches the tag's timestamp and, on every
/// incoming logical channel, it has received a message or an advance
/// grant with tag >= g. The authority computes grants with full
/// knowledge of queues and in-flight traffic, but the grants themselves
/// travel through the channel latency model (see Scenario::ideal_grants).
/// Faults surface as deadline misses, never as out-of-order messages.
///
/// Under decentralized coordination each node waits out its own
/// safe-to-advance offset (plus the safe-to-assume-absent offset while
/// an input is silent) and then proceeds; a message arriving with a tag
/// at or below the node's last processed tag is recorded as a tardy
/// fault and dropped. Faults surface as consistency violations, never
/// as added waiting.
///
/// Physical channels re-tag messages with the receiver's clock at
/// arrival; nobody ever waits on them.
///
/// Identical (model, scenario, coordinator) inputs yield bit-identical
/// outcomes.
SimOutcome simulate(const ProgramModel& m, const Scenario& s, CoordinatorKind c);

struct ExperimentRow {
  std::size_t scenario_index = 0;
  std::uint64_t seed = 0;
  bool bounds_pass = false;
  std::uint64_t tardy_count = 0;
  std::uint64_t deadline_miss_count = 0;
  std::vector<TimeValue> measured_unavailability;  // per model node
};

struct ExperimentTable {
  std::vector<std::string> node_ids;
  std::vector<ExperimentRow> rows;
};

/// Runs every scenario against the model under one coordinator and
/// checks each trace against the analytic bounds.
ExperimentTable run_matrix_experiment(const ProgramModel& m,
                                      const std::vector<Scenario>& scenarios,
                                      CoordinatorKind c);

std::string to_csv(const ExperimentTable& table);

}  // namespace cal
