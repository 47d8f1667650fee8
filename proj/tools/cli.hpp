#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace eqop::cli {

/// Summary of one command run, printed as text and as a key=value block.
struct RunReport {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> outputs;
  /// Free-form lines shown only in the text form (tables, hints).
  std::vector<std::string> notes;

  void input(std::string k, std::string v) { inputs.emplace_back(std::move(k), std::move(v)); }
  void param(std::string k, std::string v) { parameters.emplace_back(std::move(k), std::move(v)); }
  void metric(std::string k, double v) { metrics.emplace_back(std::move(k), v); }

  /// Value of a metric; throws if absent.
  double metric_value(const std::string& k) const;

  std::string text() const;
  /// command=..., input.<k>=..., param.<k>=..., metric.<k>=..., output=...
  std::string key_values() const;
};

/// Exit codes: 0 success, 2 input/format, 3 shape/rule, 4 numerical guard or
/// failed property check.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs a command and also returns its report (empty command on failure).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            RunReport& report);

}  // namespace eqop::cli
