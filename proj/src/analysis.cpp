#include "cal/analysis.hpp"

#include <algorithm>

#include "cal/errors.hpp"

namespace cal {

bool AnalysisReport::offsets_unbounded() const {
  return offsets.size() > 0 && offsets(0).is_pos_infinity() &&
         std::all_of(offsets.begin(), offsets.end(),
                     [](TimeValue v) { return v.is_pos_infinity(); });
}

bool AnalysisReport::all_deadlines_pass() const {
  return std::all_of(deadline_verdicts.begin(), deadline_verdicts.end(),
                     [](const DeadlineVerdict& v) { return v.pass; });
}

bool AnalysisReport::all_period_checks_pass() const {
  return std::all_of(period_checks.begin(), period_checks.end(),
                     [](const PeriodCheck& v) { return v.pass; });
}

mp::Matrix build_gamma(const ProgramModel& m) {
  const auto n = static_cast<Eigen::Index>(m.nodes.size());
  mp::Matrix gamma = mp::zero_matrix(n);
  for (Eigen::Index i = 0; i < n; ++i) gamma(i, i) = TimeValue::zero();
  for (const auto& c : m.channels) {
    if (c.kind != ChannelKind::Logical) continue;
    const auto i = static_cast<Eigen::Index>(m.node_index(c.to));
    const auto j = static_cast<Eigen::Index>(m.node_index(c.from));
    gamma(i, j) = c.latency_sum() - c.logical_delay;
  }
  return gamma;
}

OffsetSolution solve_offsets(const mp::Matrix& gamma) {
  if (gamma.rows() != gamma.cols())
    throw DimensionMismatch("solve_offsets: matrix is not square");
  const Eigen::Index n = gamma.rows();

  OffsetSolution out;
  out.cycle_class = mp::classify_cycles(gamma);
  if (out.cycle_class == mp::CycleClass::HasPositive) {
    out.offsets = mp::Vector::Constant(n, TimeValue::pos_infinity());
    return out;
  }

  out.star = mp::kleene_star(gamma);
  out.offsets = mp::otimes(*out.star, mp::zero_vector(n));

  // The least solution must reproduce itself under one more step.
  mp::Vector check = mp::oplus(mp::zero_vector(n), mp::otimes(gamma, out.offsets));
  if (!mp::equal(check, out.offsets))
    throw Error("solve_offsets: closure does not satisfy its fixpoint equation");
  return out;
}

mp::Vector refine_offsets_periodic(const ProgramModel& m, const mp::Matrix& gamma) {
  std::vector<const NodeSpec*> sources;
  for (const auto& n : m.nodes)
    if (n.periodic_source) sources.push_back(&n);
  if (sources.empty())
    throw AssumptionUnverifiable("no node is flagged periodic_source");
  for (const auto* s : sources) {
    if (!s->timer)
      throw AssumptionUnverifiable("periodic_source node has no timer: " + s->id);
    if (*s->timer != *sources.front()->timer)
      throw AssumptionUnverifiable("periodic_source nodes have mismatched timers: " +
                                   sources.front()->id + " vs " + s->id);
  }

  const auto n = static_cast<Eigen::Index>(m.nodes.size());
  mp::Vector offsets = mp::zero_vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m.nodes[static_cast<size_t>(i)].periodic_source) continue;
    TimeValue wait = TimeValue::zero();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      wait = max(wait, gamma(i, j));
    }
    offsets(i) = wait;
  }
  return offsets;
}

mp::Vector solve_unavailability(const mp::Matrix& gamma, const mp::Vector& offsets) {
  if (gamma.rows() != offsets.size())
    throw DimensionMismatch("solve_unavailability: matrix and vector sizes differ");
  return mp::otimes(mp::oplus(mp::identity(gamma.rows()), gamma), offsets);
}

std::vector<PeriodCheck> check_source_periods(const ProgramModel& m,
                                              const mp::Vector& unavailability) {
  std::vector<PeriodCheck> out;
  for (const auto& n : m.nodes) {
    if (!n.periodic_source || !n.timer) continue;
    PeriodCheck c;
    c.node = n.id;
    c.period = n.timer->period;
    c.unavailability = unavailability(n.index);
    c.pass = c.period > c.unavailability;
    out.push_back(c);
  }
  return out;
}

std::vector<DeadlineVerdict> check_deadlines(const ProgramModel& m, const mp::Matrix& gamma) {
  std::vector<DeadlineVerdict> out;
  for (const auto& n : m.nodes) {
    if (!n.deadline) continue;
    DeadlineVerdict v;
    v.node = n.id;
    v.deadline = *n.deadline;
    TimeValue wait = TimeValue::neg_infinity();
    for (const auto* c : m.incoming(n.index)) {
      if (c->kind != ChannelKind::Logical) continue;
      wait = max(wait, gamma(n.index, m.node_index(c->from)));
    }
    v.bound = wait.is_neg_infinity() ? n.local_exec : wait + n.local_exec;
    v.pass = v.bound <= v.deadline;
    out.push_back(v);
  }
  return out;
}

std::vector<BudgetRow> solve_budget(const ProgramModel& m, const std::string& target_node) {
  const auto& target = m.node(target_node);
  if (!target.deadline) throw NoDeadline(target_node);

  std::vector<BudgetRow> out;
  for (const auto* c : m.incoming(target.index)) {
    if (c->kind != ChannelKind::Logical) continue;
    BudgetRow row;
    row.from = c->from;
    row.deadline = *target.deadline;
    row.logical_delay = c->logical_delay;
    row.assumed_latency = c->latency_sum();
    row.slack = *target.deadline - target.local_exec - (row.assumed_latency - c->logical_delay);
    row.max_admissible = *target.deadline - target.local_exec + c->logical_delay;
    out.push_back(row);
  }
  return out;
}

AnalysisReport analyze(const ProgramModel& m) {
  {
    auto diags = validate_model(m);
    if (!diags.empty())
      throw ValidationError(diags.front().entity + ": " + diags.front().message);
  }

  AnalysisReport r;
  for (const auto& n : m.nodes) r.node_ids.push_back(n.id);
  r.gamma = build_gamma(m);

  const bool wants_refinement =
      std::any_of(m.nodes.begin(), m.nodes.end(),
                  [](const NodeSpec& n) { return n.periodic_source; });

  OffsetSolution sol = solve_offsets(r.gamma);
  r.cycle_class = sol.cycle_class;
  r.star = sol.star;

  if (wants_refinement) {
    r.refined = true;
    r.offsets = refine_offsets_periodic(m, r.gamma);
    r.unavailability = solve_unavailability(r.gamma, r.offsets);
    r.period_checks = check_source_periods(m, r.unavailability);
    r.notes.push_back(
        "offsets use the periodic-source refinement; validity requires every "
        "flagged source's period to exceed its unavailability (see period checks)");
    if (!r.all_period_checks_pass())
      r.notes.push_back("period check failed: some source period does not exceed "
                        "its unavailability, so the refined bounds are not valid");
  } else {
    r.offsets = sol.offsets;
    if (r.cycle_class == mp::CycleClass::HasPositive) {
      r.unavailability = mp::Vector::Constant(r.gamma.rows(), TimeValue::pos_infinity());
      r.notes.push_back("offsets unbounded: a communication cycle has positive "
                        "weight, so every node would wait forever");
    } else {
      r.unavailability = solve_unavailability(r.gamma, r.offsets);
      if (r.cycle_class == mp::CycleClass::NonPositiveWithZero)
        r.notes.push_back("a zero-weight cycle exists: the offset fixpoint is not "
                          "unique and the reported offsets are the least solution");
    }
  }

  r.deadline_verdicts = check_deadlines(m, r.gamma);
  return r;
}

}  // namespace cal
