#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cal/analysis.hpp"
#include "cal/errors.hpp"
#include "cal/model.hpp"
#include "cal/report.hpp"
#include "cal/sim.hpp"
#include "cal/trace.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cal::Error("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cal::Error("cannot write file: " + path);
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_file(out_path, content);
  }
}

constexpr int kExitPass = 0;
constexpr int kExitVerdictFail = 1;
constexpr int kExitUsage = 2;

int run_analyze(const std::string& topology, const std::string& format, const std::string& out) {
  const cal::ProgramModel model = cal::load_model(slurp(topology));
  const cal::AnalysisReport report = cal::analyze(model);

  if (format == "json") {
    emit(out, cal::render_json(report));
  } else if (format == "csv") {
    emit(out, cal::render_csv(report));
  } else {
    emit(out, cal::render_table(report));
  }

  const bool fail = (!report.refined && report.offsets_unbounded()) ||
                    !report.all_deadlines_pass() || !report.all_period_checks_pass();
  return fail ? kExitVerdictFail : kExitPass;
}

int run_simulate(const std::string& topology, const std::string& scenario_path,
                 const std::string& coordinator, std::optional<std::uint64_t> seed,
                 const std::string& format, const std::string& out) {
  const cal::ProgramModel model = cal::load_model(slurp(topology));
  cal::Scenario scenario = cal::parse_scenario(slurp(scenario_path));
  if (seed) scenario.seed = *seed;
  const auto coord = coordinator == "decentralized" ? cal::CoordinatorKind::Decentralized
                                                    : cal::CoordinatorKind::Centralized;

  const cal::SimOutcome outcome = cal::simulate(model, scenario, coord);
  const std::string trace = cal::serialize_trace(outcome.trace);
  const std::string summary =
      format == "json" ? cal::render_json(outcome) : cal::render_summary(outcome);

  if (out.empty()) {
    std::cout << trace;
    std::cerr << summary;
  } else {
    write_file(out, trace);
    std::cout << summary;
  }
  return kExitPass;
}

int run_check_trace(const std::string& topology, const std::string& trace_path,
                    const std::string& report_path, const std::string& format,
                    const std::string& out) {
  const cal::ProgramModel model = cal::load_model(slurp(topology));
  cal::Trace trace = cal::parse_trace(slurp(trace_path));
  trace.model = model;

  const auto diags = cal::validate_trace(trace);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "invalid trace: " << d.entity << ": " << d.message << "\n";
    return kExitUsage;
  }

  const cal::AnalysisReport report =
      report_path.empty() ? cal::analyze(model) : cal::parse_report(slurp(report_path));
  const cal::BoundsCheck bounds = cal::check_bounds(trace, report, model);

  emit(out, format == "json" ? cal::render_json(bounds) : cal::render_table(bounds));
  return bounds.pass ? kExitPass : kExitVerdictFail;
}

int run_budget(const std::string& topology, const std::string& node, const std::string& format,
               const std::string& out) {
  const cal::ProgramModel model = cal::load_model(slurp(topology));
  const auto budget = cal::solve_budget(model, node);

  emit(out, format == "json" ? cal::render_json(budget, node) : cal::render_table(budget, node));

  for (const auto& row : budget)
    if (row.slack < cal::TimeValue::zero()) return kExitVerdictFail;
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consistency/availability/latency analysis for distributed real-time programs"};
  app.require_subcommand(1);

  std::string topology, scenario, trace_path, report_path, node;
  std::string format = "table";
  std::string coordinator = "centralized";
  std::string out;
  std::optional<std::uint64_t> seed;

  auto add_format = [&](CLI::App* cmd, bool with_csv) {
    auto values = with_csv ? std::vector<std::string>{"table", "json", "csv"}
                           : std::vector<std::string>{"table", "json"};
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember(values))
        ->capture_default_str();
    cmd->add_option("--out", out, "Write the primary output to this file");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Derive offsets, unavailability, and verdicts");
  analyze->add_option("topology", topology, "Topology file")->required();
  add_format(analyze, true);

  CLI::App* simulate = app.add_subcommand("simulate", "Run a federated execution and emit a trace");
  simulate->add_option("topology", topology, "Topology file")->required();
  simulate->add_option("scenario", scenario, "Scenario file")->required();
  simulate->add_option("--coordinator", coordinator, "Coordination strategy")
      ->check(CLI::IsMember({"centralized", "decentralized"}))
      ->capture_default_str();
  simulate->add_option("--seed", seed, "Override the scenario seed");
  add_format(simulate, false);

  CLI::App* check = app.add_subcommand("check-trace", "Check a trace against analytic bounds");
  check->add_option("topology", topology, "Topology file")->required();
  check->add_option("trace", trace_path, "Trace file (JSON lines)")->required();
  check->add_option("--report", report_path, "Use a saved analysis report instead of re-analyzing");
  add_format(check, false);

  CLI::App* budget = app.add_subcommand("budget", "Back-solve latency budgets for a deadline");
  budget->add_option("topology", topology, "Topology file")->required();
  budget->add_option("--node", node, "Target node id")->required();
  add_format(budget, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand(analyze)) return run_analyze(topology, format, out);
    if (app.got_subcommand(simulate))
      return run_simulate(topology, scenario, coordinator, seed, format, out);
    if (app.got_subcommand(check)) return run_check_trace(topology, trace_path, report_path, format, out);
    if (app.got_subcommand(budget)) return run_budget(topology, node, format, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
