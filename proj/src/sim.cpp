#include "cal/sim.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cal/errors.hpp"

namespace cal {

using nlohmann::json;

std::string to_string(FaultKind k) {
  return k == FaultKind::DeadlineMiss ? "deadline-miss" : "tardy-message";
}

namespace {

constexpr TimeValue kTick = nanoseconds(1);

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t rng_draw(std::uint64_t seed, std::uint64_t chan, std::uint64_t stream,
                       std::uint64_t counter) {
  return splitmix(splitmix(splitmix(splitmix(seed) + chan) + stream) + counter);
}

bool in_window(TimeValue t, TimeValue from, TimeValue to) { return from <= t && t < to; }

/// A tag-valued quantity of the form min(bound, (tau + clock_shift, 0))
/// for reference time tau: the constant part collects event-structure
/// knowledge, the clock part models nodes whose next event can be
/// anything at or above their current clock reading.
struct SymTag {
  Tag bound = Tag::top();
  std::optional<std::int64_t> clock_shift;

  void merge(const SymTag& o) {
    bound = std::min(bound, o.bound);
    if (o.clock_shift)
      clock_shift = clock_shift ? std::min(*clock_shift, *o.clock_shift) : *o.clock_shift;
  }

  void merge_const(const Tag& t) { bound = std::min(bound, t); }

  SymTag shifted(TimeValue delay) const {
    SymTag out;
    out.bound = delayed(bound, delay);
    if (clock_shift) out.clock_shift = *clock_shift + delay.nanos();
    return out;
  }

  Tag eval(TimeValue tau) const {
    Tag v = bound;
    if (clock_shift) v = std::min(v, Tag(tau + TimeValue::from_nanos(*clock_shift), 0));
    return v;
  }

  bool operator==(const SymTag&) const = default;
};

enum class TriggerKind { Timer, Stimulus, Message };

struct PendingEvent {
  Tag tag;
  int rank = 0;  // deterministic order within a tag: timer, stimulus, then channels
  std::uint64_t serial = 0;
  TriggerKind trigger = TriggerKind::Timer;
  int chan = -1;
  std::optional<std::uint64_t> correlation;

  friend bool operator<(const PendingEvent& a, const PendingEvent& b) {
    if (a.tag != b.tag) return a.tag < b.tag;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.serial < b.serial;
  }
};

enum class ActionType { Stimulus, MsgArrive, GrantArrive, NodeStart, NodeComplete, Probe };

struct Action {
  TimeValue at;
  std::uint64_t serial = 0;
  ActionType type = ActionType::NodeStart;
  int node = -1;
  int chan = -1;
  Tag tag;
  std::optional<std::uint64_t> correlation;
  std::uint64_t msg_id = 0;
};

struct ActionLater {
  bool operator()(const Action& a, const Action& b) const {
    if (a.at != b.at) return a.at > b.at;
    return a.serial > b.serial;
  }
};

struct InflightMsg {
  std::uint64_t id = 0;
  TimeValue sent;
  Tag tag;
  TimeValue arrival;
};

struct ChanState {
  const ChannelSpec* spec = nullptr;
  int index = 0;
  int from = 0;
  int to = 0;
  LatencySpec latency;
  std::uint64_t msg_counter = 0;
  std::uint64_t grant_counter = 0;
  std::vector<InflightMsg> inflight;    // logical channels only
  TimeValue last_arrival = TimeValue::neg_infinity();  // per-channel FIFO delivery
  Tag knowledge = Tag::bottom();        // receiver-side: max(arrived msg tag, grant tag)
  Tag max_arrived = Tag::bottom();
  Tag last_issued = Tag::bottom();
  Tag jit_issued = Tag::bottom();       // largest tag granted just-in-time
  std::optional<TimeValue> pending_probe;
  SymTag frontier;       // coordinator fixpoint, capped by in-flight traffic
  SymTag frontier_open;  // same without the in-flight cap
  // Piecewise history of frontier_open: (valid-from, curve). The curve
  // only ever grows, so the earliest instant it crossed a tag is well
  // defined and recoverable from this log.
  std::vector<std::pair<TimeValue, SymTag>> open_log;

  Tag min_inflight_tag() const {
    Tag t = Tag::top();
    for (const auto& m : inflight) t = std::min(t, m.tag);
    return t;
  }
};

struct NodeState {
  const NodeSpec* spec = nullptr;
  int index = 0;
  TimeValue clock_offset;
  TimeValue exec;
  TimeValue sta;
  TimeValue staa;
  bool has_unpredictable_inputs = false;
  std::vector<int> incoming_logical;
  std::vector<int> outgoing;

  std::multiset<PendingEvent> pending;
  Tag last_processed = Tag::bottom();
  Tag last_output = Tag::bottom();
  bool busy = false;
  Tag busy_tag;
  bool busy_write = false;
  bool busy_external = false;

  std::uint64_t seq = 0;
  TimeValue last_physical = TimeValue::neg_infinity();
};

class Engine {
 public:
  Engine(const ProgramModel& m, const Scenario& s, CoordinatorKind c)
      : model_(m), scen_(s), coord_(c) {}

  SimOutcome run();

 private:
  TimeValue clock(const NodeState& n, TimeValue tau) const { return tau + n.clock_offset; }

  void schedule(Action a) {
    a.serial = next_serial_++;
    agenda_.push(a);
  }

  void emit(NodeState& n, EventKind kind, const Tag& tag, TimeValue desired,
            std::string variable, bool external, std::optional<std::uint64_t> corr) {
    TimeValue phys = desired;
    if (phys <= n.last_physical) phys = n.last_physical + kTick;
    n.last_physical = phys;
    outcome_.trace.events.push_back(
        {n.spec->id, n.seq++, kind, tag, phys, std::move(variable), external, corr});
  }

  TimeValue draw_latency(ChanState& c, std::uint64_t stream, std::uint64_t counter,
                         TimeValue send_at) const {
    const LatencySpec& d = c.latency;
    switch (d.kind) {
      case LatencySpec::Kind::Constant:
        return d.value;
      case LatencySpec::Kind::Uniform: {
        const std::uint64_t span = static_cast<std::uint64_t>((d.hi - d.lo).nanos());
        const std::uint64_t r =
            rng_draw(scen_.seed, static_cast<std::uint64_t>(c.index), stream, counter) % (span + 1);
        return d.lo + TimeValue::from_nanos(static_cast<std::int64_t>(r));
      }
      case LatencySpec::Kind::SpikeWindow:
        return in_window(send_at, d.from, d.to) ? d.spike : d.base;
      case LatencySpec::Kind::PartitionWindow:
        // Traffic entering the partition is held until it heals.
        return in_window(send_at, d.from, d.to) ? d.to - send_at : TimeValue::zero();
    }
    return TimeValue::zero();
  }

  // --- coordinator fixpoint -------------------------------------------------

  SymTag local_guarantee(const NodeState& n) const {
    SymTag g;
    if (!n.pending.empty()) g.merge_const(n.pending.begin()->tag);
    if (n.busy) g.merge_const(n.busy_tag);
    if (n.has_unpredictable_inputs) g.clock_shift = n.clock_offset.nanos();
    return g;
  }

  /// Least tags each node could still emit and each logical channel could
  /// still deliver, as symbolic functions of the reference clock.
  void recompute_frontiers(TimeValue now) {
    std::vector<SymTag> g(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i) g[i] = local_guarantee(nodes_[i]);

    const size_t cap = 4 * (nodes_.size() + 1) * (chans_.size() + 1);
    for (size_t pass = 0; pass < cap; ++pass) {
      bool changed = false;
      for (auto& c : chans_) {
        if (c.spec->kind != ChannelKind::Logical) continue;
        SymTag open = g[static_cast<size_t>(c.from)].shifted(c.spec->logical_delay);
        SymTag f = open;
        f.merge_const(c.min_inflight_tag());
        if (!(open == c.frontier_open)) {
          c.frontier_open = open;
          if (!c.open_log.empty() && c.open_log.back().first == now) {
            c.open_log.back().second = open;
          } else {
            c.open_log.emplace_back(now, open);
          }
          changed = true;
        }
        if (!(f == c.frontier)) {
          c.frontier = f;
          changed = true;
        }
        SymTag& gi = g[static_cast<size_t>(c.to)];
        SymTag merged = gi;
        merged.merge(f);
        if (!(merged == gi)) {
          gi = merged;
          changed = true;
        }
      }
      if (!changed) return;
    }
    throw Error("internal: coordinator fixpoint did not converge");
  }

  void send_grant(ChanState& c, const Tag& value, TimeValue departure, TimeValue floor,
                  TimeValue now) {
    TimeValue lat = scen_.ideal_grants
                        ? TimeValue::zero()
                        : draw_latency(c, /*stream=*/1, c.grant_counter++, departure);
    TimeValue at = departure + lat;
    if (at < floor) at = floor;
    if (at < now) at = now;
    Action a;
    a.at = at;
    a.type = ActionType::GrantArrive;
    a.chan = c.index;
    a.tag = value;
    schedule(a);
  }

  /// Issue advance grants for every channel whose frontier moved past
  /// what was last announced. Grants ride the channel's latency model
  /// unless the scenario asks for ideal ones.
  void refresh_grants(TimeValue now) {
    if (coord_ != CoordinatorKind::Centralized) return;
    recompute_frontiers(now);
    for (auto& c : chans_) {
      if (c.spec->kind != ChannelKind::Logical) continue;
      const Tag w = c.frontier.eval(now);
      if (w <= c.last_issued) continue;
      c.last_issued = w;
      send_grant(c, w, now, now, now);
    }
  }

  /// Just-in-time announcement for a blocked need: the coordinator's
  /// progress stream is dense in principle, so the announcement that the
  /// channel's frontier passed `needed` departs when that actually
  /// happened (clock threshold or last structural change), not when the
  /// need was discovered. Messages already underway at the departure
  /// instant arrived first; messages sent later cap what may be promised.
  void ensure_knowledge(ChanState& c, const Tag& needed, TimeValue now) {
    if (c.jit_issued >= needed) return;  // already announced for this need

    // Earliest instant the uncapped frontier crossed the need.
    std::optional<TimeValue> departure;
    for (size_t k = 0; k < c.open_log.size(); ++k) {
      const auto& [from, sym] = c.open_log[k];
      const TimeValue until = k + 1 < c.open_log.size() ? c.open_log[k + 1].first
                                                        : TimeValue::pos_infinity();
      if (sym.bound < needed) continue;
      TimeValue cand = from;
      if (sym.clock_shift) {
        TimeValue threshold =
            needed.timestamp() - TimeValue::from_nanos(*sym.clock_shift);
        if (needed.microstep > 0) threshold += kTick;
        cand = max(cand, threshold);
      }
      if (cand >= until) continue;
      departure = cand;
      break;
    }
    if (!departure) return;  // unreachable for now; later events will retry

    if (*departure > now) {
      // The crossing lies ahead; wake up exactly then.
      if (!c.pending_probe || *c.pending_probe > *departure) {
        c.pending_probe = *departure;
        Action a;
        a.at = *departure;
        a.type = ActionType::Probe;
        a.chan = c.index;
        schedule(a);
      }
      return;
    }

    // Promise no more than any message still underway that left after the
    // departure instant; messages underway from before it arrive first.
    Tag value = c.frontier_open.eval(now);
    TimeValue floor = TimeValue::neg_infinity();
    for (const auto& m : c.inflight) {
      if (m.sent <= *departure) {
        floor = max(floor, m.arrival);
      } else {
        value = std::min(value, m.tag);
      }
    }
    if (value < needed) return;  // a late message below the need must land first

    c.jit_issued = value;
    send_grant(c, value, *departure, floor, now);
  }

  // --- node scheduling ------------------------------------------------------

  void maybe_schedule(NodeState& n, TimeValue now) {
    if (n.busy || n.pending.empty()) return;
    const Tag g = n.pending.begin()->tag;

    TimeValue local_target = g.timestamp();
    if (coord_ == CoordinatorKind::Centralized) {
      bool blocked = false;
      for (int ci : n.incoming_logical) {
        ChanState& c = chans_[static_cast<size_t>(ci)];
        if (c.knowledge < g) {
          blocked = true;
          ensure_knowledge(c, g, now);
        }
      }
      if (blocked) return;  // an arrival, grant, or probe will re-trigger us
    } else {
      local_target = local_target + n.sta;
      for (int ci : n.incoming_logical) {
        if (chans_[static_cast<size_t>(ci)].max_arrived < g) {
          local_target = local_target + n.staa;
          break;
        }
      }
    }

    Action a;
    a.at = max(now, local_target - n.clock_offset);
    a.type = ActionType::NodeStart;
    a.node = n.index;
    schedule(a);
  }

  void start_round(NodeState& n, TimeValue now) {
    const Tag g = n.pending.begin()->tag;
    std::vector<PendingEvent> batch;
    while (!n.pending.empty() && n.pending.begin()->tag == g) {
      batch.push_back(*n.pending.begin());
      n.pending.erase(n.pending.begin());
    }

    n.last_processed = g;
    const TimeValue t0 = clock(n, now);

    if (n.spec->deadline && t0 > g.timestamp() + *n.spec->deadline) {
      ++outcome_.deadline_miss_count;
      outcome_.fault_events.push_back(
          {n.spec->id, FaultKind::DeadlineMiss, g, t0,
           "lateness " + to_string(t0 - g.timestamp()) + " exceeds deadline " +
               to_string(*n.spec->deadline)});
    }

    bool external = false;
    bool wants_output = false;
    for (const auto& ev : batch) {
      switch (ev.trigger) {
        case TriggerKind::Timer: {
          external = true;
          wants_output = true;
          const Tag next(g.time + n.spec->timer->period, 0);
          if (next.timestamp() <= scen_.horizon)
            n.pending.insert({next, 0, next_serial_++, TriggerKind::Timer, -1, std::nullopt});
          break;
        }
        case TriggerKind::Stimulus:
          emit(n, EventKind::Read, g, t0, n.spec->id + ".state", true, std::nullopt);
          external = true;
          wants_output = true;
          break;
        case TriggerKind::Message: {
          const ChanState& c = chans_[static_cast<size_t>(ev.chan)];
          emit(n, EventKind::Accept, g, t0, model_.nodes[static_cast<size_t>(c.from)].id + ".out",
               false, ev.correlation);
          if (!n.outgoing.empty()) wants_output = true;
          break;
        }
      }
    }

    n.busy = true;
    n.busy_tag = g;
    n.busy_external = external;
    n.busy_write = wants_output && n.last_output < g;

    Action a;
    a.at = now + n.exec;
    a.type = ActionType::NodeComplete;
    a.node = n.index;
    schedule(a);
  }

  void complete_round(NodeState& n, TimeValue now) {
    n.busy = false;
    if (n.busy_write) {
      n.last_output = n.busy_tag;
      const TimeValue t_end = clock(n, now);
      std::optional<std::uint64_t> corr;
      if (!n.outgoing.empty()) corr = next_correlation_++;
      emit(n, EventKind::Write, n.busy_tag, t_end, n.spec->id + ".out", n.busy_external, corr);
      for (int ci : n.outgoing) {
        ChanState& c = chans_[static_cast<size_t>(ci)];
        emit(n, EventKind::Send, n.busy_tag, t_end, n.spec->id + ".out", false, corr);

        TimeValue arrival = now + draw_latency(c, /*stream=*/0, c.msg_counter++, now);
        if (arrival < c.last_arrival) arrival = c.last_arrival;  // FIFO per channel
        c.last_arrival = arrival;

        Action a;
        a.at = arrival;
        a.type = ActionType::MsgArrive;
        a.chan = c.index;
        a.correlation = corr;
        a.msg_id = next_msg_id_++;
        if (c.spec->kind == ChannelKind::Logical) {
          a.tag = delayed(n.busy_tag, c.spec->logical_delay);
          c.inflight.push_back({a.msg_id, now, a.tag, arrival});
        }
        schedule(a);
      }
    }
    refresh_grants(now);
    maybe_schedule(n, now);
  }

  void deliver(ChanState& c, Tag tag, std::optional<std::uint64_t> corr, std::uint64_t msg_id,
               TimeValue now) {
    NodeState& n = nodes_[static_cast<size_t>(c.to)];
    if (c.spec->kind == ChannelKind::Physical) {
      // Re-tag with the receiver's clock; such messages never wait and
      // are never tardy, but they abandon the sender's logical time.
      Tag regen(clock(n, now), 0);
      if (regen <= n.last_processed)
        regen = Tag(n.last_processed.time, n.last_processed.microstep + 1);
      n.pending.insert(
          {regen, 2 + c.index, next_serial_++, TriggerKind::Message, c.index, std::nullopt});
      refresh_grants(now);
      maybe_schedule(n, now);
      return;
    }

    for (size_t k = 0; k < c.inflight.size(); ++k) {
      if (c.inflight[k].id == msg_id) {
        c.inflight.erase(c.inflight.begin() + static_cast<std::ptrdiff_t>(k));
        break;
      }
    }

    if (coord_ == CoordinatorKind::Decentralized && tag <= n.last_processed) {
      ++outcome_.tardy_count;
      outcome_.fault_events.push_back(
          {n.spec->id, FaultKind::TardyMessage, tag, clock(n, now),
           "message on " + c.spec->from + "->" + c.spec->to + " arrived with tag " +
               to_string(tag) + " at or below the last processed tag " +
               to_string(n.last_processed)});
      refresh_grants(now);
      return;
    }
    if (coord_ == CoordinatorKind::Centralized && tag < n.last_processed)
      throw Error("internal: out-of-order delivery under centralized coordination");

    c.max_arrived = std::max(c.max_arrived, tag);
    c.knowledge = std::max(c.knowledge, tag);
    n.pending.insert({tag, 2 + c.index, next_serial_++, TriggerKind::Message, c.index, corr});
    refresh_grants(now);
    maybe_schedule(n, now);
  }

  // --------------------------------------------------------------------------

  const ProgramModel& model_;
  const Scenario& scen_;
  CoordinatorKind coord_;

  std::vector<NodeState> nodes_;
  std::vector<ChanState> chans_;
  std::priority_queue<Action, std::vector<Action>, ActionLater> agenda_;
  std::uint64_t next_serial_ = 0;
  std::uint64_t next_msg_id_ = 1;
  std::uint64_t next_correlation_ = 1;
  SimOutcome outcome_;
};

SimOutcome Engine::run() {
  nodes_.resize(model_.nodes.size());
  for (size_t i = 0; i < model_.nodes.size(); ++i) {
    NodeState& n = nodes_[i];
    n.spec = &model_.nodes[i];
    n.index = static_cast<int>(i);
    if (auto it = scen_.clock_offsets.find(n.spec->id); it != scen_.clock_offsets.end())
      n.clock_offset = it->second;
    if (auto it = scen_.exec_times.find(n.spec->id); it != scen_.exec_times.end())
      n.exec = it->second;
    n.sta = n.spec->sta.value_or(TimeValue::zero());
    n.staa = n.spec->staa.value_or(TimeValue::zero());
  }

  chans_.resize(model_.channels.size());
  for (size_t i = 0; i < model_.channels.size(); ++i) {
    ChanState& c = chans_[i];
    c.spec = &model_.channels[i];
    c.index = static_cast<int>(i);
    c.from = model_.node_index(c.spec->from);
    c.to = model_.node_index(c.spec->to);
    for (const auto& l : scen_.latencies) {
      if (l.from == c.spec->from && l.to == c.spec->to) c.latency = l.latency;
    }
    nodes_[static_cast<size_t>(c.from)].outgoing.push_back(c.index);
    if (c.spec->kind == ChannelKind::Logical) {
      nodes_[static_cast<size_t>(c.to)].incoming_logical.push_back(c.index);
    } else {
      nodes_[static_cast<size_t>(c.to)].has_unpredictable_inputs = true;
    }
  }
  for (const auto& s : scen_.stimuli)
    nodes_[static_cast<size_t>(model_.node_index(s.node))].has_unpredictable_inputs = true;

  for (auto& n : nodes_) {
    if (n.spec->timer && n.spec->timer->offset <= scen_.horizon) {
      n.pending.insert(
          {Tag(n.spec->timer->offset, 0), 0, next_serial_++, TriggerKind::Timer, -1, std::nullopt});
    }
  }
  for (const auto& s : scen_.stimuli) {
    Action a;
    a.at = s.at;
    a.type = ActionType::Stimulus;
    a.node = model_.node_index(s.node);
    schedule(a);
  }

  refresh_grants(TimeValue::zero());
  for (auto& n : nodes_) maybe_schedule(n, TimeValue::zero());

  constexpr std::uint64_t kStepBudget = 20000000;
  std::uint64_t steps = 0;
  while (!agenda_.empty()) {
    if (++steps > kStepBudget) throw Error("simulation exceeded its step budget");
    const Action a = agenda_.top();
    agenda_.pop();
    const TimeValue now = a.at;
    switch (a.type) {
      case ActionType::Stimulus: {
        NodeState& n = nodes_[static_cast<size_t>(a.node)];
        Tag tag(clock(n, now), 0);
        if (tag <= n.last_processed)
          tag = Tag(n.last_processed.time, n.last_processed.microstep + 1);
        n.pending.insert({tag, 1, next_serial_++, TriggerKind::Stimulus, -1, std::nullopt});
        refresh_grants(now);
        maybe_schedule(n, now);
        break;
      }
      case ActionType::MsgArrive:
        deliver(chans_[static_cast<size_t>(a.chan)], a.tag, a.correlation, a.msg_id, now);
        break;
      case ActionType::GrantArrive: {
        ChanState& c = chans_[static_cast<size_t>(a.chan)];
        c.knowledge = std::max(c.knowledge, a.tag);
        maybe_schedule(nodes_[static_cast<size_t>(c.to)], now);
        break;
      }
      case ActionType::NodeStart: {
        NodeState& n = nodes_[static_cast<size_t>(a.node)];
        if (n.busy || n.pending.empty()) break;
        const Tag g = n.pending.begin()->tag;
        bool ready = clock(n, now) >= g.timestamp();
        if (coord_ == CoordinatorKind::Centralized) {
          for (int ci : n.incoming_logical)
            ready = ready && chans_[static_cast<size_t>(ci)].knowledge >= g;
        } else {
          TimeValue target = g.timestamp() + n.sta;
          for (int ci : n.incoming_logical) {
            if (chans_[static_cast<size_t>(ci)].max_arrived < g) {
              target = target + n.staa;
              break;
            }
          }
          ready = clock(n, now) >= target;
        }
        if (ready) {
          start_round(n, now);
          refresh_grants(now);
        } else {
          maybe_schedule(n, now);
        }
        break;
      }
      case ActionType::NodeComplete:
        complete_round(nodes_[static_cast<size_t>(a.node)], now);
        break;
      case ActionType::Probe: {
        ChanState& c = chans_[static_cast<size_t>(a.chan)];
        c.pending_probe.reset();
        refresh_grants(now);
        maybe_schedule(nodes_[static_cast<size_t>(c.to)], now);
        break;
      }
    }
  }

  for (const auto& n : nodes_) {
    if (!n.pending.empty())
      throw Error("internal: simulation stalled at node " + n.spec->id + " with tag " +
                  to_string(n.pending.begin()->tag));
  }

  outcome_.trace.model = model_;
  TraceIndex index(outcome_.trace);
  for (const auto& n : model_.nodes)
    outcome_.node_stats.push_back(
        {n.id, index.unavailability(n.id), index.processing_offset(n.id)});
  for (const auto& c : model_.channels) {
    if (c.kind != ChannelKind::Logical) continue;
    outcome_.channel_stats.push_back({c.from, c.to, index.apparent_latency(c.to, c.from),
                                      index.inconsistency(c.to, c.from)});
  }
  return outcome_;
}

}  // namespace

std::vector<Diagnostic> validate_scenario(const Scenario& s, const ProgramModel& m) {
  std::vector<Diagnostic> out;
  if (!s.horizon.is_finite() || s.horizon <= TimeValue::zero())
    out.push_back({"scenario", "horizon must be finite and positive"});

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& l : s.latencies) {
    const std::string entity = l.from + "->" + l.to;
    bool found = false;
    for (const auto& c : m.channels)
      if (c.from == l.from && c.to == l.to) found = true;
    if (!found) out.push_back({entity, "latency entry for a channel the model lacks"});
    if (!seen.insert({l.from, l.to}).second)
      out.push_back({entity, "duplicate latency entry"});

    const LatencySpec& d = l.latency;
    switch (d.kind) {
      case LatencySpec::Kind::Constant:
        if (!d.value.is_finite() || d.value < TimeValue::zero())
          out.push_back({entity, "constant latency must be finite and nonnegative"});
        break;
      case LatencySpec::Kind::Uniform:
        if (!d.lo.is_finite() || !d.hi.is_finite() || d.lo < TimeValue::zero() || d.hi < d.lo)
          out.push_back({entity, "uniform latency requires 0 <= lo <= hi, finite"});
        break;
      case LatencySpec::Kind::SpikeWindow:
        if (!d.base.is_finite() || !d.spike.is_finite() || d.base < TimeValue::zero() ||
            d.spike < TimeValue::zero())
          out.push_back({entity, "spike latencies must be finite and nonnegative"});
        if (d.from < TimeValue::zero() || d.to < d.from || d.to > s.horizon)
          out.push_back({entity, "spike window must satisfy 0 <= from <= to <= horizon"});
        break;
      case LatencySpec::Kind::PartitionWindow:
        if (d.from < TimeValue::zero() || d.to < d.from || d.to > s.horizon)
          out.push_back({entity, "partition window must satisfy 0 <= from <= to <= horizon"});
        break;
    }
  }

  for (const auto& [id, off] : s.clock_offsets) {
    if (m.find_node(id) < 0) out.push_back({id, "clock offset for a node the model lacks"});
    if (!off.is_finite()) out.push_back({id, "clock offset must be finite"});
  }
  for (const auto& [id, exec] : s.exec_times) {
    if (m.find_node(id) < 0) out.push_back({id, "exec time for a node the model lacks"});
    if (!exec.is_finite() || exec < TimeValue::zero())
      out.push_back({id, "exec time must be finite and nonnegative"});
  }
  for (const auto& st : s.stimuli) {
    if (m.find_node(st.node) < 0) out.push_back({st.node, "stimulus for a node the model lacks"});
    if (st.at < TimeValue::zero() || st.at > s.horizon)
      out.push_back({st.node, "stimulus must arrive within [0, horizon]"});
  }
  return out;
}

SimOutcome simulate(const ProgramModel& m, const Scenario& s, CoordinatorKind c) {
  {
    auto diags = validate_model(m);
    if (!diags.empty())
      throw ValidationError(diags.front().entity + ": " + diags.front().message);
    diags = validate_scenario(s, m);
    if (!diags.empty())
      throw ScenarioInvalid(diags.front().entity + ": " + diags.front().message);
  }
  if (c == CoordinatorKind::Decentralized) {
    for (const auto& n : m.nodes) {
      bool has_logical_input = false;
      for (const auto& ch : m.channels)
        if (ch.to == n.id && ch.kind == ChannelKind::Logical) has_logical_input = true;
      if (has_logical_input && !n.sta) throw StaMissing(n.id);
    }
  }
  return Engine(m, s, c).run();
}

ExperimentTable run_matrix_experiment(const ProgramModel& m,
                                      const std::vector<Scenario>& scenarios,
                                      CoordinatorKind c) {
  ExperimentTable table;
  for (const auto& n : m.nodes) table.node_ids.push_back(n.id);
  if (scenarios.empty()) return table;

  const AnalysisReport report = analyze(m);
  for (size_t i = 0; i < scenarios.size(); ++i) {
    SimOutcome out = simulate(m, scenarios[i], c);
    BoundsCheck bounds = check_bounds(out.trace, report, m);
    ExperimentRow row;
    row.scenario_index = i;
    row.seed = scenarios[i].seed;
    row.bounds_pass = bounds.pass;
    row.tardy_count = out.tardy_count;
    row.deadline_miss_count = out.deadline_miss_count;
    for (const auto& ns : out.node_stats) row.measured_unavailability.push_back(ns.unavailability);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string to_csv(const ExperimentTable& table) {
  std::ostringstream os;
  os << "scenario,seed,bounds_pass,tardy_messages,deadline_misses";
  for (const auto& id : table.node_ids) os << ",unavailability_" << id;
  os << "\n";
  for (const auto& r : table.rows) {
    os << r.scenario_index << "," << r.seed << "," << (r.bounds_pass ? "true" : "false") << ","
       << r.tardy_count << "," << r.deadline_miss_count;
    for (const auto& v : r.measured_unavailability) os << "," << to_string(v);
    os << "\n";
  }
  return os.str();
}

namespace {

TimeValue scenario_time(const json& j, const char* key, const std::string& entity) {
  if (!j.contains(key))
    throw ParseError(entity + ": missing field '" + key + "'");
  return parse_time(j.at(key).get<std::string>());
}

}  // namespace

Scenario parse_scenario(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario: expected a JSON object");

  Scenario s;
  if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
  s.horizon = scenario_time(doc, "horizon", "scenario");
  if (doc.contains("grants")) {
    const std::string g = doc.at("grants").get<std::string>();
    if (g == "ideal") {
      s.ideal_grants = true;
    } else if (g == "shared") {
      s.ideal_grants = false;
    } else {
      throw ParseError("scenario: 'grants' must be 'shared' or 'ideal'");
    }
  }
  if (doc.contains("latencies")) {
    for (const auto& jl : doc.at("latencies")) {
      ChannelScenario cs;
      cs.from = jl.at("from").get<std::string>();
      cs.to = jl.at("to").get<std::string>();
      const std::string entity = cs.from + "->" + cs.to;
      const std::string kind = jl.value("kind", std::string("constant"));
      if (kind == "constant") {
        cs.latency.kind = LatencySpec::Kind::Constant;
        cs.latency.value = scenario_time(jl, "value", entity);
      } else if (kind == "uniform") {
        cs.latency.kind = LatencySpec::Kind::Uniform;
        cs.latency.lo = scenario_time(jl, "lo", entity);
        cs.latency.hi = scenario_time(jl, "hi", entity);
      } else if (kind == "spike") {
        cs.latency.kind = LatencySpec::Kind::SpikeWindow;
        cs.latency.base = scenario_time(jl, "base", entity);
        cs.latency.spike = scenario_time(jl, "spike", entity);
        cs.latency.from = scenario_time(jl, "window_from", entity);
        cs.latency.to = scenario_time(jl, "window_to", entity);
      } else if (kind == "partition") {
        cs.latency.kind = LatencySpec::Kind::PartitionWindow;
        cs.latency.from = scenario_time(jl, "window_from", entity);
        cs.latency.to = scenario_time(jl, "window_to", entity);
      } else {
        throw ParseError(entity + ": unknown latency kind '" + kind + "'");
      }
      s.latencies.push_back(std::move(cs));
    }
  }
  if (doc.contains("clock_offsets")) {
    for (const auto& jo : doc.at("clock_offsets"))
      s.clock_offsets[jo.at("node").get<std::string>()] =
          scenario_time(jo, "offset", "clock_offsets");
  }
  if (doc.contains("exec_times")) {
    for (const auto& je : doc.at("exec_times"))
      s.exec_times[je.at("node").get<std::string>()] = scenario_time(je, "exec", "exec_times");
  }
  if (doc.contains("stimuli")) {
    for (const auto& js : doc.at("stimuli"))
      s.stimuli.push_back({js.at("node").get<std::string>(), scenario_time(js, "at", "stimuli")});
  }
  return s;
}

}  // namespace cal
