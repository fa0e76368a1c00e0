#include "qcdmdp/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace qcdmdp::csv {

std::string format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace {

std::string index_or(std::size_t v, const char* sentinel) {
  return v == kNoChange ? sentinel : std::to_string(v);
}

template <class T>
std::string optional_index(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string{};
}

}  // namespace

void write_runs(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << "run_id,policy,gamma,tau_switch,horizon,discounted_cost,detection_delay,premature_switch\n";
  for (const auto& r : runs) {
    out << r.run_id << ',' << r.policy << ',' << index_or(r.gamma, "inf") << ','
        << optional_index(r.tau_switch) << ',' << r.horizon << ',' << format(r.discounted_cost)
        << ',' << optional_index(r.detection_delay) << ',' << (r.premature_switch ? 1 : 0) << '\n';
  }
}

void write_summary(std::ostream& out, const std::vector<EvaluationReport>& reports) {
  out << "policy,n_runs,mean_cost,stderr,mean_delay,premature_rate,A,B,seed\n";
  for (const auto& r : reports) {
    out << r.policy << ',' << r.n_runs << ',' << format(r.mean_cost) << ','
        << format(r.stderr_cost) << ',' << (std::isnan(r.mean_delay) ? "" : format(r.mean_delay))
        << ',' << format(r.premature_rate) << ',' << format(r.threshold_a) << ','
        << format(r.threshold_b) << ',' << r.seed << '\n';
  }
}

void write_frontier(std::ostream& out, const std::vector<FrontierRow>& rows) {
  out << "alpha,policy,feasible,A,B,e1_cost,e1_stderr,einf_cost,einf_stderr\n";
  for (const auto& r : rows) {
    out << format(r.alpha) << ',' << r.policy << ',' << (r.feasible ? 1 : 0) << ','
        << format(r.cell.a) << ',' << format(r.cell.b) << ',' << format(r.e1_cost) << ','
        << format(r.e1_stderr) << ',' << format(r.einf_cost) << ',' << format(r.einf_stderr)
        << '\n';
  }
}

void write_delay_profile(std::ostream& out, const std::vector<DelayRow>& rows) {
  out << "threshold_level,mean_delay,false_switch_rate,n_runs\n";
  for (const auto& r : rows) {
    out << format(r.threshold_level) << ',' << format(r.mean_delay) << ','
        << format(r.false_switch_rate) << ',' << r.n_runs << '\n';
  }
}

void write_grid(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "A,B,mean_cost,stderr,mean_delay,premature_rate\n";
  for (const auto& c : cells) {
    out << format(c.cell.a) << ',' << format(c.cell.b) << ',' << format(c.report.mean_cost)
        << ',' << format(c.report.stderr_cost) << ','
        << (std::isnan(c.report.mean_delay) ? "" : format(c.report.mean_delay)) << ','
        << format(c.report.premature_rate) << '\n';
  }
}

}  // namespace qcdmdp::csv
