#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cal/time.hpp"

namespace cal {

struct TimerSpec {
  TimeValue offset;
  TimeValue period;

  friend bool operator==(const TimerSpec&, const TimerSpec&) = default;
};

/// One sequential process of the federation.
struct NodeSpec {
  std::string id;
  int index = 0;  // position in the model's node list
  std::optional<TimerSpec> timer;
  std::optional<TimeValue> deadline;
  std::optional<TimeValue> sta;
  std::optional<TimeValue> staa;
  /// Asserts that this node's outputs are driven solely by its timer and
  /// that the timer period exceeds any unavailability, enabling the
  /// refined offset derivation. The claim is checked after analysis, not
  /// inferred.
  bool periodic_source = false;
  /// Execution time of the node's own reaction.
  TimeValue local_exec;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

enum class ChannelKind { Logical, Physical };

/// A directed connection. Logical channels preserve tags and may add a
/// fixed logical delay, which is a declared tolerance for inconsistency.
/// Physical channels re-tag messages with the receiver's clock on
/// arrival and therefore carry no logical delay.
struct ChannelSpec {
  std::string from;
  std::string to;
  ChannelKind kind = ChannelKind::Logical;
  TimeValue logical_delay;
  /// Worst-case bounds assumed for the analysis: sender-side execution
  /// time, network latency, and clock error (the last may be negative).
  TimeValue exec_bound;
  TimeValue net_bound;
  TimeValue clock_err_bound;

  /// The per-edge latency assumption exec + net + clock_err.
  TimeValue latency_sum() const { return exec_bound + net_bound + clock_err_bound; }

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct Diagnostic {
  std::string entity;
  std::string message;
};

struct ProgramModel {
  std::vector<NodeSpec> nodes;
  std::vector<ChannelSpec> channels;

  int node_count() const { return static_cast<int>(nodes.size()); }

  /// Index of a node id, or -1.
  int find_node(const std::string& id) const;

  /// Index of a node id; throws UnknownNode.
  int node_index(const std::string& id) const;

  const NodeSpec& node(const std::string& id) const { return nodes[static_cast<size_t>(node_index(id))]; }

  /// Channels ending at the given node index.
  std::vector<const ChannelSpec*> incoming(int node_index) const;
  std::vector<const ChannelSpec*> outgoing(int node_index) const;
};

/// Structural checks; an empty result means the model is well formed.
std::vector<Diagnostic> validate_model(const ProgramModel& m);

/// Parses and validates a topology document. Throws ParseError for
/// malformed JSON and ValidationError (naming the entity) when an
/// invariant is violated.
ProgramModel load_model(const std::string& document);

/// Canonical JSON rendering; load_model(serialize_model(m)) == m for
/// every valid model.
std::string serialize_model(const ProgramModel& m);

}  // namespace cal
