#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracafd/oracles.hpp"
#include "fracafd/solution_lift.hpp"

namespace fracafd::cli {

/// Bad command line or configuration (exit code 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string family = "heat";
  std::optional<double> alpha;
  std::optional<double> sigma;
  /// "example1", "example2" or the path of an expression file.
  std::string data;
  std::optional<int> terms;
  std::optional<double> rel_error;
  std::optional<double> window;
  SearchConfig search;
  bool x_range_set = false;
  std::string output_dir = ".";
  std::vector<double> t_list;
  std::vector<double> x_list;
  std::string depth = "quick";
  /// result.json to solve from instead of decomposing.
  std::string from;

  KernelFamily kernel_family() const;
  double data_window() const;
  SearchConfig search_config() const;
  StopRule stop_rule() const;
  void validate() const;
};

/// Applies one key=value setting; keys are the long flag names without dashes.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads key=value lines ('#' comments, blank lines ignored).
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Preset configuration of a builtin experiment ("example1" or "example2").
RunConfig preset(const std::string& name);

/// The builtin data, or the expression file named by cfg.data.
DataFunction make_data(const RunConfig& cfg);
double example1_datum(double x);
double example2_datum(double x);

/// "%.17g".
std::string format_number(double v);

std::string representation_json(const SparseRepresentation& rep, const RunConfig& cfg, bool partial);
/// Inverse of representation_json; fills cfg from the echoed configuration.
SparseRepresentation load_representation(const std::string& path, RunConfig& cfg);

void write_decomposition(const SparseRepresentation& rep, const RunConfig& cfg, const DataFunction& f,
                         const GramContext& ctx, bool partial);
void write_solution(const SolutionField& sol, const RunConfig& cfg, const DataFunction& f);

/// Default plot/solve grids.
std::vector<double> default_t_list();
std::vector<double> default_x_list(const RunConfig& cfg);

int cmd_decompose(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_example(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const std::string& depth, std::ostream& out);

/// Entry point; returns the process exit code (0 ok, 1 numerical failure,
/// 2 bad arguments).
int run(int argc, char** argv);

}  // namespace fracafd::cli
