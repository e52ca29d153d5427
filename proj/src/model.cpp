#include "cal/model.hpp"

#include <set>
#include <utility>

#include <json.hpp>

#include "cal/errors.hpp"

namespace cal {

using nlohmann::json;

int ProgramModel::find_node(const std::string& id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

int ProgramModel::node_index(const std::string& id) const {
  int i = find_node(id);
  if (i < 0) throw UnknownNode(id);
  return i;
}

std::vector<const ChannelSpec*> ProgramModel::incoming(int node_index) const {
  std::vector<const ChannelSpec*> out;
  const std::string& id = nodes[static_cast<size_t>(node_index)].id;
  for (const auto& c : channels)
    if (c.to == id) out.push_back(&c);
  return out;
}

std::vector<const ChannelSpec*> ProgramModel::outgoing(int node_index) const {
  std::vector<const ChannelSpec*> out;
  const std::string& id = nodes[static_cast<size_t>(node_index)].id;
  for (const auto& c : channels)
    if (c.from == id) out.push_back(&c);
  return out;
}

std::vector<Diagnostic> validate_model(const ProgramModel& m) {
  std::vector<Diagnostic> out;
  std::set<std::string> ids;
  for (const auto& n : m.nodes) {
    if (n.id.empty()) out.push_back({n.id, "node id must not be empty"});
    if (!ids.insert(n.id).second) out.push_back({n.id, "duplicate node id"});
    if (n.timer && n.timer->period <= TimeValue::zero())
      out.push_back({n.id, "timer period must be positive"});
    if (n.timer && !n.timer->offset.is_finite())
      out.push_back({n.id, "timer offset must be finite"});
    if (n.deadline && *n.deadline < TimeValue::zero())
      out.push_back({n.id, "deadline must be nonnegative"});
    if (n.sta && *n.sta < TimeValue::zero())
      out.push_back({n.id, "sta must be nonnegative"});
    if (n.staa && *n.staa < TimeValue::zero())
      out.push_back({n.id, "staa must be nonnegative"});
    if (n.local_exec < TimeValue::zero())
      out.push_back({n.id, "local_exec must be nonnegative"});
    if (n.periodic_source && !n.timer)
      out.push_back({n.id, "periodic_source requires a timer"});
  }
  for (size_t i = 0; i < m.nodes.size(); ++i) {
    if (m.nodes[i].index != static_cast<int>(i))
      out.push_back({m.nodes[i].id, "node index must match list position"});
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& c : m.channels) {
    const std::string entity = c.from + "->" + c.to;
    if (m.find_node(c.from) < 0) out.push_back({entity, "channel references unknown node: " + c.from});
    if (m.find_node(c.to) < 0) out.push_back({entity, "channel references unknown node: " + c.to});
    if (c.from == c.to) out.push_back({entity, "self channels are not allowed"});
    if (!pairs.insert({c.from, c.to}).second)
      out.push_back({entity, "duplicate channel for this node pair"});
    if (c.logical_delay < TimeValue::zero())
      out.push_back({entity, "logical_delay must be nonnegative"});
    if (c.exec_bound < TimeValue::zero())
      out.push_back({entity, "exec_bound must be nonnegative"});
    if (c.net_bound < TimeValue::zero())
      out.push_back({entity, "net_bound must be nonnegative"});
    if (c.kind == ChannelKind::Physical && c.logical_delay != TimeValue::zero())
      out.push_back({entity, "physical channels carry no logical delay"});
  }
  return out;
}

namespace {

TimeValue time_field(const json& j, const char* key, const std::string& entity) {
  if (!j.contains(key)) return TimeValue::zero();
  if (!j.at(key).is_string())
    throw ParseError(entity + ": field '" + key + "' must be a time string");
  return parse_time(j.at(key).get<std::string>());
}

std::optional<TimeValue> opt_time_field(const json& j, const char* key, const std::string& entity) {
  if (!j.contains(key)) return std::nullopt;
  if (!j.at(key).is_string())
    throw ParseError(entity + ": field '" + key + "' must be a time string");
  return parse_time(j.at(key).get<std::string>());
}

}  // namespace

ProgramModel load_model(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw ParseError(std::string("topology: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc.at("nodes").is_array())
    throw ParseError("topology: expected an object with a 'nodes' array");

  ProgramModel m;
  for (const auto& jn : doc.at("nodes")) {
    if (!jn.is_object() || !jn.contains("id") || !jn.at("id").is_string())
      throw ParseError("topology: every node needs a string 'id'");
    NodeSpec n;
    n.id = jn.at("id").get<std::string>();
    n.index = static_cast<int>(m.nodes.size());
    if (jn.contains("timer")) {
      const auto& jt = jn.at("timer");
      if (!jt.is_object()) throw ParseError(n.id + ": 'timer' must be an object");
      n.timer = TimerSpec{time_field(jt, "offset", n.id), time_field(jt, "period", n.id)};
    }
    n.deadline = opt_time_field(jn, "deadline", n.id);
    n.sta = opt_time_field(jn, "sta", n.id);
    n.staa = opt_time_field(jn, "staa", n.id);
    if (jn.contains("periodic_source")) {
      if (!jn.at("periodic_source").is_boolean())
        throw ParseError(n.id + ": 'periodic_source' must be a boolean");
      n.periodic_source = jn.at("periodic_source").get<bool>();
    }
    n.local_exec = time_field(jn, "local_exec", n.id);
    m.nodes.push_back(std::move(n));
  }

  if (doc.contains("channels")) {
    if (!doc.at("channels").is_array()) throw ParseError("topology: 'channels' must be an array");
    for (const auto& jc : doc.at("channels")) {
      if (!jc.is_object() || !jc.contains("from") || !jc.contains("to"))
        throw ParseError("topology: every channel needs 'from' and 'to'");
      ChannelSpec c;
      c.from = jc.at("from").get<std::string>();
      c.to = jc.at("to").get<std::string>();
      const std::string entity = c.from + "->" + c.to;
      if (jc.contains("kind")) {
        const std::string kind = jc.at("kind").get<std::string>();
        if (kind == "logical") {
          c.kind = ChannelKind::Logical;
        } else if (kind == "physical") {
          c.kind = ChannelKind::Physical;
        } else {
          throw ParseError(entity + ": channel kind must be 'logical' or 'physical'");
        }
      }
      c.logical_delay = time_field(jc, "logical_delay", entity);
      c.exec_bound = time_field(jc, "exec_bound", entity);
      c.net_bound = time_field(jc, "net_bound", entity);
      c.clock_err_bound = time_field(jc, "clock_err_bound", entity);
      // clock_err_bound may be negative; the time string carries the sign.
      m.channels.push_back(std::move(c));
    }
  }

  auto diags = validate_model(m);
  if (!diags.empty())
    throw ValidationError(diags.front().entity + ": " + diags.front().message);
  return m;
}

std::string serialize_model(const ProgramModel& m) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : m.nodes) {
    json jn;
    jn["id"] = n.id;
    if (n.timer) {
      jn["timer"] = {{"offset", to_string(n.timer->offset)}, {"period", to_string(n.timer->period)}};
    }
    if (n.deadline) jn["deadline"] = to_string(*n.deadline);
    if (n.sta) jn["sta"] = to_string(*n.sta);
    if (n.staa) jn["staa"] = to_string(*n.staa);
    if (n.periodic_source) jn["periodic_source"] = true;
    if (n.local_exec != TimeValue::zero()) jn["local_exec"] = to_string(n.local_exec);
    doc["nodes"].push_back(jn);
  }
  doc["channels"] = json::array();
  for (const auto& c : m.channels) {
    json jc;
    jc["from"] = c.from;
    jc["to"] = c.to;
    jc["kind"] = c.kind == ChannelKind::Physical ? "physical" : "logical";
    if (c.logical_delay != TimeValue::zero()) jc["logical_delay"] = to_string(c.logical_delay);
    if (c.exec_bound != TimeValue::zero()) jc["exec_bound"] = to_string(c.exec_bound);
    if (c.net_bound != TimeValue::zero()) jc["net_bound"] = to_string(c.net_bound);
    if (c.clock_err_bound != TimeValue::zero()) jc["clock_err_bound"] = to_string(c.clock_err_bound);
    doc["channels"].push_back(jc);
  }
  return doc.dump(2) + "\n";
}

}  // namespace cal
