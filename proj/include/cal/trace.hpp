#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cal/analysis.hpp"
#include "cal/model.hpp"
#include "cal/time.hpp"

namespace cal {

enum class EventKind { Read, Write, Send, Accept };

std::string to_string(EventKind k);

/// One observed event. `physical` is the reading of the process-local
/// clock when the event starts being processed. `external` marks reads
/// and writes triggered from outside the system (user requests, sensor
/// inputs); those are the events the availability measures range over.
/// `correlation` groups one update propagation: a write, the sends that
/// report it, and the accepts that receive it share an id.
struct TraceEvent {
  std::string process;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Read;
  Tag tag;
  TimeValue physical;
  std::string variable;
  bool external = false;
  std::optional<std::uint64_t> correlation;
};

struct Trace {
  std::vector<TraceEvent> events;
  std::optional<ProgramModel> model;  // binds process names to node ids
};

/// Well-formedness diagnostics: per-process tag order and strict
/// physical-time order, accept/send correlation order, and the rule that
/// a read at tag g sees only values written at an earlier physical time.
std::vector<Diagnostic> validate_trace(const Trace& t);

/// Precomputed per-process and per-correlation lookups for the
/// measurement operations.
class TraceIndex {
 public:
  explicit TraceIndex(const Trace& t);

  const Trace& trace() const { return *trace_; }

  /// Largest logical lag from a write on j to its acceptance on i;
  /// +inf when some write never reaches i, 0 when j never writes.
  TimeValue inconsistency(const std::string& i, const std::string& j) const;

  /// Largest lateness of externally triggered reads at i.
  TimeValue unavailability(const std::string& i) const;

  /// Largest lateness of externally triggered writes at i.
  TimeValue processing_offset(const std::string& i) const;

  /// Largest cross-clock delay from an externally triggered write on j
  /// to its acceptance on i; may be negative under clock skew; equals
  /// the processing offset when i == j.
  TimeValue apparent_latency(const std::string& i, const std::string& j) const;

 private:
  void require_known(const std::string& id) const;
  const std::vector<const TraceEvent*>* events_of(const std::string& process) const;
  const std::vector<const TraceEvent*>* accepts_on(const std::string& process,
                                                   std::uint64_t correlation) const;

  const Trace* trace_;
  std::map<std::string, std::vector<const TraceEvent*>> by_process_;
  // (process, correlation) -> accept events
  std::map<std::pair<std::string, std::uint64_t>, std::vector<const TraceEvent*>> accept_index_;
};

TimeValue measure_inconsistency(const Trace& t, const std::string& i, const std::string& j);
TimeValue measure_unavailability(const Trace& t, const std::string& i);
TimeValue measure_processing_offset(const Trace& t, const std::string& i);
TimeValue measure_apparent_latency(const Trace& t, const std::string& i, const std::string& j);

struct NodeBoundRow {
  std::string node;
  TimeValue measured;  // observed unavailability
  TimeValue bound;     // analytic unavailability
  bool pass = false;
};

struct ChannelBoundRow {
  std::string from;
  std::string to;
  TimeValue measured;  // observed inconsistency
  TimeValue declared;  // logical delay
  bool pass = false;
};

struct BoundsCheck {
  bool pass = false;
  std::vector<NodeBoundRow> nodes;
  std::vector<ChannelBoundRow> channels;
  std::vector<std::string> failures;
};

/// Conformance of a trace against analytic bounds: every node's observed
/// unavailability must stay within the report's, and every logical
/// channel's observed inconsistency within its declared delay. Throws
/// ModelMismatch when the trace mentions processes the model lacks or the
/// report was computed for different nodes.
BoundsCheck check_bounds(const Trace& t, const AnalysisReport& report, const ProgramModel& m);

/// JSON-lines, one event per line, canonical field rendering.
std::string serialize_trace(const Trace& t);
Trace parse_trace(const std::string& text);

}  // namespace cal
