#pragma once

#include <string>

#include "cal/analysis.hpp"
#include "cal/sim.hpp"
#include "cal/trace.hpp"

namespace cal {

/// Human-readable analysis report.
std::string render_table(const AnalysisReport& r);

/// Canonical JSON: re-parsing and re-serializing yields identical bytes.
std::string render_json(const AnalysisReport& r);

/// Inverse of render_json for reports saved to disk.
AnalysisReport parse_report(const std::string& document);

/// Gamma, its closure, offsets, and unavailability as CSV blocks.
std::string render_csv(const AnalysisReport& r);

std::string render_table(const std::vector<BudgetRow>& budget, const std::string& node);
std::string render_json(const std::vector<BudgetRow>& budget, const std::string& node);

std::string render_table(const BoundsCheck& b);
std::string render_json(const BoundsCheck& b);

std::string render_summary(const SimOutcome& o);
std::string render_json(const SimOutcome& o);

}  // namespace cal
