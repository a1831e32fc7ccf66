#pragma once

// Experiment orchestration behind the `hardy` command line tool: config
// resolution (JSON file, then flags), one ReportRow per parameter cell, and
// JSON / CSV serialisation.

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hardy/params.hpp"
#include "hardy/spherical.hpp"

namespace hardy {

enum class Command { Constant, Spectrum, Verify, Sweep, Table };
enum class OutputFormat { Json, Csv };

std::string_view to_string(Command command);
Command parse_command(std::string_view text);

struct GridCell {
  int d = 3;
  int k = 1;
  double p = 2.0;
  double a = 0.0;
  double b = 0.0;
  std::string cone = "punctured";

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Parameter axes; single-valued except for `sweep`, which takes the Cartesian product.
struct ParamAxes {
  std::vector<int> d{3};
  std::vector<int> k{1};
  std::vector<double> p{2.0};
  std::vector<double> a{0.0};
  std::vector<double> b{0.0};
  std::vector<std::string> cones{"punctured"};
};

struct RunConfig {
  Command command = Command::Constant;
  ParamAxes axes;
  int mesh_size = kDefaultMeshSize;
  std::vector<double> delta_list{0.2, 0.1, 0.05};
  std::vector<int> h_list;
  std::string output_path;  // empty: standard output
  OutputFormat format = OutputFormat::Json;
  double tolerance = 1e-3;
  int jobs = 1;
  std::optional<std::vector<GridCell>> grid;  // table only; empty optional selects the built-in grid

  /// Throws HardyError(InvalidArgument) on malformed settings.
  void validate() const;
  /// The single cell of a non-sweep command.
  GridCell cell() const;
};

/// Flag values as typed on the command line; lists are comma separated.
struct ConfigOverrides {
  std::optional<std::string> d, k, p, a, b, cone, mesh, deltas, hs, format, out, jobs, tol;
};

/// Defaults, then the JSON config object, then the flags.
RunConfig resolve_config(Command command, const nlohmann::json& file_config, const ConfigOverrides& flags);

nlohmann::json config_to_json(const RunConfig& config);

enum class RowStatus { Ok, NoClosedForm, SolverFail, CheckFailed };
std::string_view to_string(RowStatus status);
RowStatus parse_status(std::string_view text);

struct TracePoint {
  double x;  // delta, h or mesh size
  double value;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct ReportRow {
  GridCell inputs;
  std::optional<double> closed_form;
  std::string closed_form_source;
  std::optional<double> numeric_M;
  std::optional<double> gap;  // numeric_M - closed_form
  std::optional<double> lambda;
  std::optional<double> residual;
  std::optional<int> iterations;
  std::string trace_kind;  // "", "delta", "h" or "mesh"
  std::vector<TracePoint> quotient_trace;
  std::optional<double> extrapolated;
  std::optional<double> fitted_rate;
  RowStatus status = RowStatus::Ok;
  std::string message;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

nlohmann::json row_to_json(const ReportRow& row);
ReportRow row_from_json(const nlohmann::json& j);

/// Closed form and numeric M for one cell.
ReportRow cmd_constant(const RunConfig& config);
/// Mesh refinement trace of M (mesh/4, mesh/2, mesh).
ReportRow cmd_spectrum(const RunConfig& config);
/// u_delta quotient trace with Richardson limit, and the I_h trace when h_list is set.
std::vector<ReportRow> cmd_verify(const RunConfig& config);
/// cmd_constant over the Cartesian product of the axes, `jobs` cells at a time.
std::vector<ReportRow> cmd_sweep(const RunConfig& config);
/// cmd_constant over the configured grid, or the built-in grid of known closed forms.
std::vector<ReportRow> cmd_table(const RunConfig& config);

std::vector<GridCell> builtin_table_grid();

std::vector<ReportRow> run(const RunConfig& config);

/// 0 iff every row is ok (which includes |gap| <= tolerance), 1 otherwise.
int exit_code(const std::vector<ReportRow>& rows);

inline constexpr const char* kCsvColumns =
    "d,k,p,a,b,cone,closed_form,closed_form_source,numeric_M,gap,lambda,residual,iterations,"
    "trace_kind,quotient_trace,extrapolated,fitted_rate,status,message";

std::string render_json(const RunConfig& config, const std::vector<ReportRow>& rows);
std::string render_csv(const std::vector<ReportRow>& rows);
std::string render(const RunConfig& config, const std::vector<ReportRow>& rows);

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

/// Writes via a temporary file in the same directory and a rename.
void write_atomically(const std::string& path, const std::string& contents);

nlohmann::json error_object(const HardyError& error);

}  // namespace hardy
