#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qcdmdp/harness.hpp"

namespace qcdmdp::csv {

/// Formats a double with %.9g; "inf"/"-inf"/"nan" for non-finite values.
std::string format(double x);

void write_runs(std::ostream& out, const std::vector<RunRecord>& runs);
void write_summary(std::ostream& out, const std::vector<EvaluationReport>& reports);
void write_frontier(std::ostream& out, const std::vector<FrontierRow>& rows);
void write_delay_profile(std::ostream& out, const std::vector<DelayRow>& rows);
void write_grid(std::ostream& out, const std::vector<CellResult>& cells);

}  // namespace qcdmdp::csv
