#include "cal/report.hpp"

#include <sstream>
#include <vector>

#include <json.hpp>

#include "cal/errors.hpp"

namespace cal {

using nlohmann::json;

namespace {

std::string pad(const std::string& s, size_t width) {
  return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
}

std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      os << pad(row[i], widths[i]);
      if (i + 1 < row.size()) os << "  ";
    }
    os << "\n";
  }
  return os.str();
}

json matrix_json(const mp::Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const mp::Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_string(v(i)));
  return out;
}

}  // namespace

std::string render_table(const AnalysisReport& r) {
  std::ostringstream os;
  os << "gamma:\n" << mp::format(r.gamma);
  if (r.star) os << "closure:\n" << mp::format(*r.star);
  os << "cycle class: " << mp::to_string(r.cycle_class) << "\n";
  os << "offsets: " << (r.refined ? "periodic-source refinement" : "least fixpoint") << "\n\n";

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"node", "offset", "unavailability"});
  for (size_t i = 0; i < r.node_ids.size(); ++i) {
    rows.push_back({r.node_ids[i], to_string(r.offsets(static_cast<Eigen::Index>(i))),
                    to_string(r.unavailability(static_cast<Eigen::Index>(i)))});
  }
  os << render_grid(rows);

  if (!r.deadline_verdicts.empty()) {
    os << "\ndeadlines:\n";
    std::vector<std::vector<std::string>> drows;
    drows.push_back({"node", "deadline", "bound", "verdict"});
    for (const auto& v : r.deadline_verdicts)
      drows.push_back({v.node, to_string(v.deadline), to_string(v.bound), v.pass ? "pass" : "FAIL"});
    os << render_grid(drows);
  }

  if (!r.period_checks.empty()) {
    os << "\nsource periods:\n";
    std::vector<std::vector<std::string>> prows;
    prows.push_back({"node", "period", "unavailability", "verdict"});
    for (const auto& c : r.period_checks)
      prows.push_back(
          {c.node, to_string(c.period), to_string(c.unavailability), c.pass ? "pass" : "FAIL"});
    os << render_grid(prows);
  }

  for (const auto& note : r.notes) os << "\nnote: " << note << "\n";
  return os.str();
}

std::string render_json(const AnalysisReport& r) {
  json doc;
  doc["nodes"] = r.node_ids;
  doc["gamma"] = matrix_json(r.gamma);
  if (r.star) doc["closure"] = matrix_json(*r.star);
  doc["cycle_class"] = mp::to_string(r.cycle_class);
  doc["refined"] = r.refined;
  doc["offsets"] = vector_json(r.offsets);
  doc["unavailability"] = vector_json(r.unavailability);
  doc["deadlines"] = json::array();
  for (const auto& v : r.deadline_verdicts)
    doc["deadlines"].push_back({{"node", v.node},
                                {"deadline", to_string(v.deadline)},
                                {"bound", to_string(v.bound)},
                                {"pass", v.pass}});
  doc["period_checks"] = json::array();
  for (const auto& c : r.period_checks)
    doc["period_checks"].push_back({{"node", c.node},
                                    {"period", to_string(c.period)},
                                    {"unavailability", to_string(c.unavailability)},
                                    {"pass", c.pass}});
  doc["notes"] = r.notes;
  return doc.dump(2) + "\n";
}

namespace {

mp::Matrix matrix_from_json(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  mp::Matrix m = mp::zero_matrix(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n)
      throw ParseError("report: matrix is not square");
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = parse_time(row.at(static_cast<size_t>(j)).get<std::string>());
  }
  return m;
}

mp::Vector vector_from_json(const json& items) {
  mp::Vector v = mp::zero_vector(static_cast<Eigen::Index>(items.size()));
  for (size_t i = 0; i < items.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = parse_time(items.at(i).get<std::string>());
  return v;
}

}  // namespace

AnalysisReport parse_report(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  try {
    AnalysisReport r;
    for (const auto& id : doc.at("nodes")) r.node_ids.push_back(id.get<std::string>());
    r.gamma = matrix_from_json(doc.at("gamma"));
    if (doc.contains("closure")) r.star = matrix_from_json(doc.at("closure"));
    const std::string cc = doc.at("cycle_class").get<std::string>();
    if (cc == "all-negative") {
      r.cycle_class = mp::CycleClass::AllNegative;
    } else if (cc == "non-positive-with-zero") {
      r.cycle_class = mp::CycleClass::NonPositiveWithZero;
    } else if (cc == "has-positive") {
      r.cycle_class = mp::CycleClass::HasPositive;
    } else {
      throw ParseError("report: unknown cycle_class '" + cc + "'");
    }
    r.refined = doc.at("refined").get<bool>();
    r.offsets = vector_from_json(doc.at("offsets"));
    r.unavailability = vector_from_json(doc.at("unavailability"));
    for (const auto& jd : doc.at("deadlines"))
      r.deadline_verdicts.push_back({jd.at("node").get<std::string>(),
                                     parse_time(jd.at("deadline").get<std::string>()),
                                     parse_time(jd.at("bound").get<std::string>()),
                                     jd.at("pass").get<bool>()});
    for (const auto& jc : doc.at("period_checks"))
      r.period_checks.push_back({jc.at("node").get<std::string>(),
                                 parse_time(jc.at("period").get<std::string>()),
                                 parse_time(jc.at("unavailability").get<std::string>()),
                                 jc.at("pass").get<bool>()});
    for (const auto& n : doc.at("notes")) r.notes.push_back(n.get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

std::string render_csv(const AnalysisReport& r) {
  std::ostringstream os;
  os << "gamma\n" << mp::to_csv(r.gamma);
  if (r.star) os << "closure\n" << mp::to_csv(*r.star);
  os << "offsets\n" << mp::to_csv(r.offsets);
  os << "unavailability\n" << mp::to_csv(r.unavailability);
  return os.str();
}

std::string render_table(const std::vector<BudgetRow>& budget, const std::string& node) {
  std::ostringstream os;
  os << "latency budget for " << node << ":\n";
  if (budget.empty()) {
    os << "(no incoming logical channels)\n";
    return os.str();
  }
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"from", "deadline", "delay", "assumed", "slack", "max admissible"});
  for (const auto& b : budget)
    rows.push_back({b.from, to_string(b.deadline), to_string(b.logical_delay),
                    to_string(b.assumed_latency), to_string(b.slack),
                    to_string(b.max_admissible)});
  os << render_grid(rows);
  return os.str();
}

std::string render_json(const std::vector<BudgetRow>& budget, const std::string& node) {
  json doc;
  doc["node"] = node;
  doc["channels"] = json::array();
  for (const auto& b : budget)
    doc["channels"].push_back({{"from", b.from},
                               {"deadline", to_string(b.deadline)},
                               {"logical_delay", to_string(b.logical_delay)},
                               {"assumed_latency", to_string(b.assumed_latency)},
                               {"slack", to_string(b.slack)},
                               {"max_admissible", to_string(b.max_admissible)}});
  return doc.dump(2) + "\n";
}

std::string render_table(const BoundsCheck& b) {
  std::ostringstream os;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"node", "measured", "bound", "verdict"});
  for (const auto& n : b.nodes)
    rows.push_back({n.node, to_string(n.measured), to_string(n.bound), n.pass ? "pass" : "FAIL"});
  os << render_grid(rows);
  if (!b.channels.empty()) {
    os << "\nchannels:\n";
    std::vector<std::vector<std::string>> crows;
    crows.push_back({"channel", "measured", "declared", "verdict"});
    for (const auto& c : b.channels)
      crows.push_back({c.from + "->" + c.to, to_string(c.measured), to_string(c.declared),
                       c.pass ? "pass" : "FAIL"});
    os << render_grid(crows);
  }
  os << "\nconformance: " << (b.pass ? "pass" : "FAIL") << "\n";
  return os.str();
}

std::string render_json(const BoundsCheck& b) {
  json doc;
  doc["pass"] = b.pass;
  doc["nodes"] = json::array();
  for (const auto& n : b.nodes)
    doc["nodes"].push_back({{"node", n.node},
                            {"measured", to_string(n.measured)},
                            {"bound", to_string(n.bound)},
                            {"pass", n.pass}});
  doc["channels"] = json::array();
  for (const auto& c : b.channels)
    doc["channels"].push_back({{"from", c.from},
                               {"to", c.to},
                               {"measured", to_string(c.measured)},
                               {"declared", to_string(c.declared)},
                               {"pass", c.pass}});
  doc["failures"] = b.failures;
  return doc.dump(2) + "\n";
}

std::string render_summary(const SimOutcome& o) {
  std::ostringstream os;
  os << "events: " << o.trace.events.size() << "\n";
  os << "deadline misses: " << o.deadline_miss_count << "\n";
  os << "tardy messages: " << o.tardy_count << "\n\n";

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"node", "unavailability", "processing offset"});
  for (const auto& n : o.node_stats)
    rows.push_back({n.node, to_string(n.unavailability), to_string(n.processing_offset)});
  os << render_grid(rows);

  if (!o.channel_stats.empty()) {
    os << "\nchannels:\n";
    std::vector<std::vector<std::string>> crows;
    crows.push_back({"channel", "apparent latency", "inconsistency"});
    for (const auto& c : o.channel_stats)
      crows.push_back(
          {c.from + "->" + c.to, to_string(c.apparent_latency), to_string(c.inconsistency)});
    os << render_grid(crows);
  }

  if (!o.fault_events.empty()) {
    os << "\nfaults:\n";
    for (const auto& f : o.fault_events)
      os << "  " << to_string(f.kind) << " at " << f.node << " tag " << to_string(f.tag) << ": "
         << f.detail << "\n";
  }
  return os.str();
}

std::string render_json(const SimOutcome& o) {
  json doc;
  doc["events"] = o.trace.events.size();
  doc["deadline_misses"] = o.deadline_miss_count;
  doc["tardy_messages"] = o.tardy_count;
  doc["nodes"] = json::array();
  for (const auto& n : o.node_stats)
    doc["nodes"].push_back({{"node", n.node},
                            {"unavailability", to_string(n.unavailability)},
                            {"processing_offset", to_string(n.processing_offset)}});
  doc["channels"] = json::array();
  for (const auto& c : o.channel_stats)
    doc["channels"].push_back({{"from", c.from},
                               {"to", c.to},
                               {"apparent_latency", to_string(c.apparent_latency)},
                               {"inconsistency", to_string(c.inconsistency)}});
  doc["faults"] = json::array();
  for (const auto& f : o.fault_events)
    doc["faults"].push_back({{"node", f.node},
                             {"kind", to_string(f.kind)},
                             {"tag", {{"t", to_string(f.tag.time)}, {"m", f.tag.microstep}}},
                             {"physical", to_string(f.physical)},
                             {"detail", f.detail}});
  return doc.dump(2) + "\n";
}

}  // namespace cal
