#include "cal/trace.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "cal/errors.hpp"

namespace cal {

using nlohmann::json;

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Read: return "read";
    case EventKind::Write: return "write";
    case EventKind::Send: return "send";
    case EventKind::Accept: return "accept";
  }
  return "?";
}

namespace {

EventKind kind_from_string(const std::string& s) {
  if (s == "read") return EventKind::Read;
  if (s == "write") return EventKind::Write;
  if (s == "send") return EventKind::Send;
  if (s == "accept") return EventKind::Accept;
  throw ParseError("unknown event kind '" + s + "'");
}

}  // namespace

std::vector<Diagnostic> validate_trace(const Trace& t) {
  std::vector<Diagnostic> out;

  std::map<std::string, std::vector<const TraceEvent*>> by_process;
  for (const auto& e : t.events) by_process[e.process].push_back(&e);

  for (auto& [process, events] : by_process) {
    std::stable_sort(events.begin(), events.end(),
                     [](const TraceEvent* a, const TraceEvent* b) { return a->seq < b->seq; });
    for (size_t k = 0; k + 1 < events.size(); ++k) {
      const auto* a = events[k];
      const auto* b = events[k + 1];
      if (a->seq == b->seq)
        out.push_back({process, "duplicate sequence number " + std::to_string(a->seq)});
      if (b->tag < a->tag)
        out.push_back({process, "tags must be nondecreasing: " + to_string(a->tag) +
                                    " then " + to_string(b->tag) + " at seq " +
                                    std::to_string(b->seq)});
      if (b->physical <= a->physical)
        out.push_back({process, "physical times must strictly increase: " +
                                    to_string(a->physical) + " then " + to_string(b->physical) +
                                    " at seq " + std::to_string(b->seq)});
    }
  }

  // Correlation: an accept must follow, in tag order, some send of the
  // same update.
  std::map<std::uint64_t, std::vector<const TraceEvent*>> sends;
  for (const auto& e : t.events)
    if (e.kind == EventKind::Send && e.correlation) sends[*e.correlation].push_back(&e);
  for (const auto& e : t.events) {
    // Accepts without a correlation are legitimate: a channel that
    // re-tags on receipt severs the link to the originating send.
    if (e.kind != EventKind::Accept || !e.correlation) continue;
    auto it = sends.find(*e.correlation);
    if (it == sends.end()) {
      out.push_back({e.process, "accept correlation " + std::to_string(*e.correlation) +
                                    " matches no send"});
      continue;
    }
    for (const auto* s : it->second) {
      if (e.tag < s->tag)
        out.push_back({e.process, "accept tag " + to_string(e.tag) +
                                      " is below its send tag " + to_string(s->tag)});
    }
  }

  // A read must see a value written at an earlier physical time: among
  // same-process, same-variable writes/accepts with the read's tag, all
  // must have smaller physical times.
  for (auto& [process, events] : by_process) {
    for (const auto* r : events) {
      if (r->kind != EventKind::Read) continue;
      const TraceEvent* source = nullptr;
      for (const auto* w : events) {
        if (w->kind != EventKind::Write && w->kind != EventKind::Accept) continue;
        if (w->variable != r->variable || w->tag > r->tag) continue;
        if (!source || w->tag > source->tag || (w->tag == source->tag && w->physical > source->physical))
          source = w;
      }
      if (source && source->tag == r->tag && source->physical >= r->physical)
        out.push_back({process, "read at " + to_string(r->tag) +
                                    " sees a same-tag value written at physical time " +
                                    to_string(source->physical) + " >= " + to_string(r->physical)});
    }
  }

  return out;
}

TraceIndex::TraceIndex(const Trace& t) : trace_(&t) {
  for (const auto& e : t.events) by_process_[e.process].push_back(&e);
  for (auto& [_, events] : by_process_) {
    std::stable_sort(events.begin(), events.end(),
                     [](const TraceEvent* a, const TraceEvent* b) { return a->seq < b->seq; });
  }
  for (const auto& e : t.events) {
    if (e.kind == EventKind::Accept && e.correlation)
      accept_index_[std::make_pair(e.process, *e.correlation)].push_back(&e);
  }
}

void TraceIndex::require_known(const std::string& id) const {
  if (trace_->model && trace_->model->find_node(id) < 0) throw UnknownNode(id);
}

const std::vector<const TraceEvent*>* TraceIndex::events_of(const std::string& process) const {
  auto it = by_process_.find(process);
  return it == by_process_.end() ? nullptr : &it->second;
}

const std::vector<const TraceEvent*>* TraceIndex::accepts_on(const std::string& process,
                                                             std::uint64_t correlation) const {
  auto it = accept_index_.find(std::make_pair(process, correlation));
  return it == accept_index_.end() ? nullptr : &it->second;
}

TimeValue TraceIndex::inconsistency(const std::string& i, const std::string& j) const {
  require_known(i);
  require_known(j);
  const auto* writes = events_of(j);
  if (!writes) return TimeValue::zero();
  bool any = false;
  TimeValue worst = TimeValue::neg_infinity();
  for (const auto* w : *writes) {
    if (w->kind != EventKind::Write) continue;
    any = true;
    const auto* accepts = w->correlation ? accepts_on(i, *w->correlation) : nullptr;
    if (!accepts) {
      worst = TimeValue::pos_infinity();
    } else {
      for (const auto* a : *accepts) worst = max(worst, a->tag.timestamp() - w->tag.timestamp());
    }
  }
  return any ? worst : TimeValue::zero();
}

TimeValue TraceIndex::unavailability(const std::string& i) const {
  require_known(i);
  const auto* events = events_of(i);
  if (!events) return TimeValue::zero();
  TimeValue worst = TimeValue::zero();
  for (const auto* e : *events) {
    if (e->kind != EventKind::Read || !e->external) continue;
    worst = max(worst, e->physical - e->tag.timestamp());
  }
  return worst;
}

TimeValue TraceIndex::processing_offset(const std::string& i) const {
  require_known(i);
  const auto* events = events_of(i);
  if (!events) return TimeValue::zero();
  TimeValue worst = TimeValue::zero();
  for (const auto* e : *events) {
    if (e->kind != EventKind::Write || !e->external) continue;
    worst = max(worst, e->physical - e->tag.timestamp());
  }
  return worst;
}

TimeValue TraceIndex::apparent_latency(const std::string& i, const std::string& j) const {
  require_known(i);
  require_known(j);
  if (i == j) return processing_offset(i);
  const auto* writes = events_of(j);
  if (!writes) return TimeValue::zero();
  bool any = false;
  TimeValue worst = TimeValue::neg_infinity();
  for (const auto* w : *writes) {
    if (w->kind != EventKind::Write || !w->external) continue;
    any = true;
    const auto* accepts = w->correlation ? accepts_on(i, *w->correlation) : nullptr;
    if (!accepts) {
      worst = TimeValue::pos_infinity();
    } else {
      for (const auto* a : *accepts) worst = max(worst, a->physical - w->tag.timestamp());
    }
  }
  return any ? worst : TimeValue::zero();
}

TimeValue measure_inconsistency(const Trace& t, const std::string& i, const std::string& j) {
  return TraceIndex(t).inconsistency(i, j);
}

TimeValue measure_unavailability(const Trace& t, const std::string& i) {
  return TraceIndex(t).unavailability(i);
}

TimeValue measure_processing_offset(const Trace& t, const std::string& i) {
  return TraceIndex(t).processing_offset(i);
}

TimeValue measure_apparent_latency(const Trace& t, const std::string& i, const std::string& j) {
  return TraceIndex(t).apparent_latency(i, j);
}

BoundsCheck check_bounds(const Trace& t, const AnalysisReport& report, const ProgramModel& m) {
  if (report.node_ids.size() != m.nodes.size())
    throw ModelMismatch("report and model disagree on the number of nodes");
  for (size_t i = 0; i < m.nodes.size(); ++i)
    if (report.node_ids[i] != m.nodes[i].id)
      throw ModelMismatch("report was computed for node '" + report.node_ids[i] +
                          "', model has '" + m.nodes[i].id + "'");
  for (const auto& e : t.events)
    if (m.find_node(e.process) < 0)
      throw ModelMismatch("trace mentions a process the model lacks: " + e.process);

  TraceIndex index(t);
  BoundsCheck out;
  out.pass = true;

  for (const auto& n : m.nodes) {
    NodeBoundRow row;
    row.node = n.id;
    row.measured = index.unavailability(n.id);
    row.bound = report.unavailability(n.index);
    row.pass = row.measured <= row.bound;
    if (!row.pass) {
      out.pass = false;
      out.failures.push_back("unavailability at " + n.id + ": measured " +
                             to_string(row.measured) + " exceeds bound " + to_string(row.bound));
    }
    out.nodes.push_back(row);
  }

  for (const auto& c : m.channels) {
    if (c.kind != ChannelKind::Logical) continue;
    ChannelBoundRow row;
    row.from = c.from;
    row.to = c.to;
    row.measured = index.inconsistency(c.to, c.from);
    row.declared = c.logical_delay;
    row.pass = row.measured <= row.declared;
    if (!row.pass) {
      out.pass = false;
      out.failures.push_back("inconsistency on " + c.from + "->" + c.to + ": measured " +
                             to_string(row.measured) + " exceeds declared " +
                             to_string(row.declared));
    }
    out.channels.push_back(row);
  }

  return out;
}

std::string serialize_trace(const Trace& t) {
  std::ostringstream os;
  for (const auto& e : t.events) {
    json j;
    j["process"] = e.process;
    j["seq"] = e.seq;
    j["kind"] = to_string(e.kind);
    j["tag"] = {{"t", to_string(e.tag.time)}, {"m", e.tag.microstep}};
    j["physical"] = to_string(e.physical);
    j["variable"] = e.variable;
    j["external"] = e.external;
    if (e.correlation) j["correlation"] = *e.correlation;
    os << j.dump() << "\n";
  }
  return os.str();
}

Trace parse_trace(const std::string& text) {
  Trace t;
  std::istringstream is(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      TraceEvent e;
      e.process = j.at("process").get<std::string>();
      e.seq = j.at("seq").get<std::uint64_t>();
      e.kind = kind_from_string(j.at("kind").get<std::string>());
      e.tag = Tag(parse_time(j.at("tag").at("t").get<std::string>()),
                  j.at("tag").at("m").get<std::uint32_t>());
      e.physical = parse_time(j.at("physical").get<std::string>());
      e.variable = j.value("variable", std::string());
      e.external = j.value("external", false);
      if (j.contains("correlation")) e.correlation = j.at("correlation").get<std::uint64_t>();
      t.events.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return t;
}

}  // namespace cal
