#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

struct RunResult {
  int status = -1;
  std::string output;  // stdout only
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(CALTOOL_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  size_t n;
  while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, n);
  const int rc = pclose(pipe);
  result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return result;
}

std::string fx(const std::string& name) { return std::string(CAL_FIXTURE_DIR) + "/" + name; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

}  // namespace

TEST_CASE("analyze reports and exits zero on a feasible model") {
  const RunResult r = run("analyze " + fx("pipeline.json"));
  CHECK(r.status == 0);
  CHECK(r.output.find("cycle class: all-negative") != std::string::npos);
  CHECK(r.output.find("Actuate") != std::string::npos);
  CHECK(r.output.find("pass") != std::string::npos);
}

TEST_CASE("analyze exits one when offsets diverge") {
  const RunResult r = run("analyze " + fx("cycle_positive.json"));
  CHECK(r.status == 1);
  CHECK(r.output.find("unbounded") != std::string::npos);
  CHECK(r.output.find("+inf") != std::string::npos);
}

TEST_CASE("analyze exits one on an infeasible deadline") {
  write_file("/tmp/cal_cli_tight.json", R"({
    "nodes": [ {"id": "Src", "timer": {"offset": "0s", "period": "10ms"}},
               {"id": "Snk", "deadline": "1ms"} ],
    "channels": [ {"from": "Src", "to": "Snk", "exec_bound": "2ms", "net_bound": "2ms"} ]
  })");
  const RunResult r = run("analyze /tmp/cal_cli_tight.json");
  CHECK(r.status == 1);
  CHECK(r.output.find("FAIL") != std::string::npos);
}

TEST_CASE("analyze json output is canonical") {
  const RunResult r = run("analyze " + fx("intersection.json") + " --format json");
  CHECK(r.status == 0);
  const json parsed = json::parse(r.output);
  CHECK(parsed.dump(2) + "\n" == r.output);
  CHECK(parsed.at("refined").get<bool>());
  CHECK(parsed.at("offsets").at(2).get<std::string>() == "3ms");
  CHECK(parsed.at("unavailability").at(0).get<std::string>() == "6ms");
}

TEST_CASE("analyze csv output carries infinity literals") {
  const RunResult r = run("analyze " + fx("pipeline.json") + " --format csv");
  CHECK(r.status == 0);
  CHECK(r.output.find("gamma\n") == 0);
  CHECK(r.output.find("-inf") != std::string::npos);
  CHECK(r.output.find("offsets\n") != std::string::npos);
}

TEST_CASE("budget reports the admissible latency sum") {
  const RunResult r = run("budget " + fx("adas.json") + " --node Braking");
  CHECK(r.status == 0);
  CHECK(r.output.find("13ms") != std::string::npos);

  const RunResult j = run("budget " + fx("adas.json") + " --node Braking --format json");
  const json parsed = json::parse(j.output);
  CHECK(parsed.at("channels").at(0).at("max_admissible").get<std::string>() == "13ms");
}

TEST_CASE("budget without a deadline is a usage error") {
  CHECK(run("budget " + fx("adas.json") + " --node Vision").status == 2);
}

TEST_CASE("budget with negative slack exits one") {
  write_file("/tmp/cal_cli_slack.json", R"({
    "nodes": [ {"id": "A", "timer": {"offset": "0s", "period": "10ms"}},
               {"id": "B", "deadline": "3ms"} ],
    "channels": [ {"from": "A", "to": "B", "logical_delay": "10ms", "net_bound": "15ms"} ]
  })");
  const RunResult r = run("budget /tmp/cal_cli_slack.json --node B");
  CHECK(r.status == 1);
  CHECK(r.output.find("-2ms") != std::string::npos);
}

TEST_CASE("simulate writes a trace and check-trace accepts it") {
  const RunResult sim = run("simulate " + fx("pipeline.json") + " " +
                            fx("pipeline_nominal.json") + " --out /tmp/cal_cli_trace.jsonl");
  CHECK(sim.status == 0);
  CHECK(sim.output.find("tardy messages: 0") != std::string::npos);

  const RunResult check =
      run("check-trace " + fx("pipeline.json") + " /tmp/cal_cli_trace.jsonl");
  CHECK(check.status == 0);
  CHECK(check.output.find("conformance: pass") != std::string::npos);
}

TEST_CASE("check-trace exits one when a bound is violated") {
  const RunResult sim =
      run("simulate " + fx("intersection.json") + " " + fx("intersection_partition.json") +
          " --out /tmp/cal_cli_partition.jsonl");
  REQUIRE(sim.status == 0);
  const RunResult check =
      run("check-trace " + fx("intersection.json") + " /tmp/cal_cli_partition.jsonl");
  CHECK(check.status == 1);
  CHECK(check.output.find("FAIL") != std::string::npos);
}

TEST_CASE("check-trace accepts a saved report") {
  const RunResult save =
      run("analyze " + fx("pipeline.json") + " --format json --out /tmp/cal_cli_report.json");
  REQUIRE(save.status == 0);
  const RunResult sim = run("simulate " + fx("pipeline.json") + " " +
                            fx("pipeline_const.json") + " --out /tmp/cal_cli_trace2.jsonl");
  REQUIRE(sim.status == 0);
  const RunResult check = run("check-trace " + fx("pipeline.json") +
                              " /tmp/cal_cli_trace2.jsonl --report /tmp/cal_cli_report.json");
  CHECK(check.status == 0);
}

TEST_CASE("simulate honors the seed override") {
  const RunResult a = run("simulate " + fx("pipeline.json") + " " + fx("pipeline_nominal.json") +
                          " --seed 42 --out /tmp/cal_cli_s42a.jsonl");
  const RunResult b = run("simulate " + fx("pipeline.json") + " " + fx("pipeline_nominal.json") +
                          " --seed 42 --out /tmp/cal_cli_s42b.jsonl");
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  std::ifstream fa("/tmp/cal_cli_s42a.jsonl"), fb("/tmp/cal_cli_s42b.jsonl");
  std::string ta((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string tb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ta == tb);
  CHECK(!ta.empty());
}

TEST_CASE("usage and parse failures exit two") {
  CHECK(run("analyze /tmp/does_not_exist_anywhere.json").status == 2);
  CHECK(run("analyze").status == 2);
  CHECK(run("frobnicate x").status == 2);
  CHECK(run("simulate " + fx("pipeline.json")).status == 2);
  write_file("/tmp/cal_cli_bad.json", "{ nodes: oops");
  CHECK(run("analyze /tmp/cal_cli_bad.json").status == 2);
  write_file("/tmp/cal_cli_badtrace.jsonl", "{\"process\": 3}\n");
  CHECK(run("check-trace " + fx("pipeline.json") + " /tmp/cal_cli_badtrace.jsonl").status == 2);
}

TEST_CASE("an invalid trace is rejected before conformance checking") {
  // Tags regress within the process: the trace is rejected as input.
  write_file("/tmp/cal_cli_regress.jsonl",
             R"({"process":"Sense","seq":0,"kind":"write","tag":{"t":"5ms","m":0},"physical":"5ms","variable":"x","external":true})"
             "\n"
             R"({"process":"Sense","seq":1,"kind":"write","tag":{"t":"3ms","m":0},"physical":"6ms","variable":"x","external":true})"
             "\n");
  CHECK(run("check-trace " + fx("pipeline.json") + " /tmp/cal_cli_regress.jsonl").status == 2);
}
