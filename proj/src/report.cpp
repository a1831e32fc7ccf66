#include "hardy/report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include "hardy/verifier.hpp"

namespace hardy {

using nlohmann::json;

namespace {

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw HardyError(ErrorKind::InvalidArgument, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::string_view what) {
  std::vector<T> values;
  for (const auto& item : split_list(text)) values.push_back(parse_number<T>(item, what));
  return values;
}

// A config value may be a number, a string list or an array.
template <typename T>
std::vector<T> json_list(const json& value, std::string_view what) {
  if (value.is_string()) return parse_list<T>(value.get<std::string>(), what);
  if (value.is_number()) return {value.get<T>()};
  if (value.is_array()) {
    std::vector<T> values;
    for (const auto& item : value) {
      if (!item.is_number()) throw HardyError(ErrorKind::InvalidArgument, "config '" + std::string(what) + "' must hold numbers");
      values.push_back(item.get<T>());
    }
    return values;
  }
  throw HardyError(ErrorKind::InvalidArgument, "config '" + std::string(what) + "' has the wrong type");
}

std::vector<std::string> json_strings(const json& value, std::string_view what) {
  if (value.is_string()) return split_list(value.get<std::string>());
  if (value.is_array()) {
    std::vector<std::string> values;
    for (const auto& item : value) {
      if (!item.is_string()) throw HardyError(ErrorKind::InvalidArgument, "config '" + std::string(what) + "' must hold strings");
      values.push_back(item.get<std::string>());
    }
    return values;
  }
  throw HardyError(ErrorKind::InvalidArgument, "config '" + std::string(what) + "' has the wrong type");
}

template <typename T>
T json_scalar(const json& value, std::string_view what) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (value.is_string()) return value.get<std::string>();
  } else {
    if (value.is_number()) return value.get<T>();
    if (value.is_string()) return parse_number<T>(value.get<std::string>(), what);
  }
  throw HardyError(ErrorKind::InvalidArgument, "config '" + std::string(what) + "' has the wrong type");
}

OutputFormat parse_format(std::string_view text) {
  if (text == "json") return OutputFormat::Json;
  if (text == "csv") return OutputFormat::Csv;
  throw HardyError(ErrorKind::InvalidArgument, "format must be json or csv");
}

GridCell cell_from_json(const json& j) {
  if (!j.is_object()) throw HardyError(ErrorKind::InvalidArgument, "grid entries must be objects");
  GridCell cell;
  cell.d = json_scalar<int>(j.at("d"), "d");
  cell.k = json_scalar<int>(j.at("k"), "k");
  cell.p = json_scalar<double>(j.at("p"), "p");
  cell.a = json_scalar<double>(j.at("a"), "a");
  cell.b = json_scalar<double>(j.at("b"), "b");
  cell.cone = json_scalar<std::string>(j.at("cone"), "cone");
  return cell;
}

json cell_to_json(const GridCell& cell) {
  return {{"d", cell.d}, {"k", cell.k}, {"p", cell.p}, {"a", cell.a}, {"b", cell.b}, {"cone", cell.cone}};
}

template <typename T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
  const auto& value = j.at(key);
  if (value.is_null()) return std::nullopt;
  return value.get<T>();
}

std::string error_text(const HardyError& error) {
  return std::string(to_string(error.kind())) + ": " + error.what();
}

HardyParams params_of(const GridCell& cell) { return HardyParams(cell.d, cell.k, cell.p, cell.a, cell.b); }

void set_status_from_gap(ReportRow& row, double tolerance) {
  if (row.status == RowStatus::SolverFail) return;
  if (!row.closed_form) {
    row.status = RowStatus::NoClosedForm;
  } else if (row.gap && std::abs(*row.gap) > tolerance) {
    row.status = RowStatus::CheckFailed;
    row.message = "|gap| exceeds tolerance " + format_double(tolerance);
  } else {
    row.status = RowStatus::Ok;
  }
}

// Closed form and numeric M; solver failures become the row status,
// invalid or inadmissible input propagates.
ReportRow constant_row(const GridCell& cell, int mesh_size, double tolerance) {
  const auto params = params_of(cell);
  const auto cone = parse_cone(cell.cone);
  require_admissible(params, cone);
  ReportRow row;
  row.inputs = cell;
  if (auto closed = closed_form_constant(params, cone)) {
    row.closed_form = closed->value;
    row.closed_form_source = closed->source;
  }
  try {
    const auto result = solve_M(params, cone, mesh_size);
    row.numeric_M = result.M;
    row.lambda = result.lambda;
    row.residual = result.residual;
    row.iterations = result.iterations;
  } catch (const HardyError& error) {
    row.status = RowStatus::SolverFail;
    row.message = error_text(error);
  }
  if (row.closed_form && row.numeric_M) row.gap = *row.numeric_M - *row.closed_form;
  set_status_from_gap(row, tolerance);
  return row;
}

ReportRow safe_constant_row(const GridCell& cell, int mesh_size, double tolerance) {
  try {
    return constant_row(cell, mesh_size, tolerance);
  } catch (const HardyError& error) {
    ReportRow row;
    row.inputs = cell;
    row.status = RowStatus::SolverFail;
    row.message = error_text(error);
    return row;
  }
}

std::vector<ReportRow> evaluate_cells(const std::vector<GridCell>& cells, const RunConfig& config) {
  std::vector<ReportRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      rows[i] = safe_constant_row(cells[i], config.mesh_size, config.tolerance);
    }
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, config.jobs));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < std::min(jobs, cells.size()); ++j) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();
  return rows;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void append_failure(std::string& message, const std::string& what) {
  if (!message.empty()) message += "; ";
  message += what;
}

ReportRow delta_row(const GridCell& cell, const RunConfig& config) {
  const auto params = params_of(cell);
  const auto cone = parse_cone(cell.cone);
  ReportRow row;
  row.inputs = cell;
  row.trace_kind = "delta";
  if (auto closed = closed_form_constant(params, cone)) {
    row.closed_form = closed->value;
    row.closed_form_source = closed->source;
  }
  try {
    const auto spectral = solve_M(params, cone, config.mesh_size);
    row.numeric_M = spectral.M;
    row.lambda = spectral.lambda;
    row.residual = spectral.residual;
    row.iterations = spectral.iterations;
    if (row.closed_form) row.gap = spectral.M - *row.closed_form;
    const double reference = row.closed_form.value_or(spectral.M);

    VerifyOptions options;
    options.mesh_size = config.mesh_size;
    for (double delta : config.delta_list) {
      const auto eval = verify_inequality(params, cone, {PowerLawSplit{delta}, std::nullopt, spectral.minimizer}, options);
      row.quotient_trace.push_back({delta, eval.quotient});
    }

    const auto& trace = row.quotient_trace;
    const std::size_t n = trace.size();
    if (n >= 2) {
      const auto& [d1, q1] = trace[n - 2];
      const auto& [d2, q2] = trace[n - 1];
      row.extrapolated = (d1 * d1 * q2 - d2 * d2 * q1) / (d1 * d1 - d2 * d2);
    }
    if (n >= 3) {
      const auto& [d0, q0] = trace[n - 3];
      const auto& [d1, q1] = trace[n - 2];
      const auto& [d2, q2] = trace[n - 1];
      if (std::abs(d0 / d1 - d1 / d2) <= 1e-12 * (d0 / d1) && (q0 - q1) / (q1 - q2) > 0.0) {
        row.fitted_rate = std::log((q0 - q1) / (q1 - q2)) / std::log(d0 / d1);
      }
    }

    std::string failures;
    const double slack = 1e-8 * std::max(1.0, std::abs(reference));
    for (const auto& [delta, q] : trace) {
      if (q < reference - slack) append_failure(failures, "quotient below the sharp constant at delta " + format_double(delta));
      if (!(q > spectral.M)) append_failure(failures, "quotient attains M at delta " + format_double(delta));
    }
    if (row.extrapolated && std::abs(*row.extrapolated - reference) > config.tolerance * std::abs(reference)) {
      append_failure(failures, "extrapolated limit misses the reference");
    }
    if (n >= 3 && (!row.fitted_rate || *row.fitted_rate < 1.9)) append_failure(failures, "observed order in delta below 1.9");
    row.status = failures.empty() ? RowStatus::Ok : RowStatus::CheckFailed;
    row.message = failures;
  } catch (const HardyError& error) {
    row.status = RowStatus::SolverFail;
    row.message = error_text(error);
  }
  return row;
}

ReportRow h_row(const GridCell& cell, const RunConfig& config) {
  const auto params = params_of(cell);
  ReportRow row;
  row.inputs = cell;
  row.trace_kind = "h";
  try {
    for (int h : config.h_list) {
      row.quotient_trace.push_back({static_cast<double>(h), cutoff_decay(params, {0.25, 4.0}, h).i_h});
    }
    const auto& trace = row.quotient_trace;
    std::vector<double> log_h, log_i;
    bool positive = true;
    for (const auto& [h, i_h] : trace) {
      positive = positive && i_h > 0.0;
      log_h.push_back(std::log(h));
      log_i.push_back(std::log(i_h));
    }
    if (trace.size() >= 2 && positive) row.fitted_rate = least_squares_slope(log_h, log_i);

    std::string failures;
    const double p = params.p();
    if (std::abs(params.cylindrical_order() - p) <= 1e-12) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (const auto& [h, i_h] : trace) {
        const double scaled = i_h * std::pow(h, p - 1.0);
        lo = std::min(lo, scaled);
        hi = std::max(hi, scaled);
      }
      if (!trace.empty() && !(hi <= 2.0 * lo)) append_failure(failures, "I_h h^(p-1) varies by more than a factor 2");
    } else {
      for (std::size_t i = 1; i < trace.size(); ++i) {
        if (!(trace[i].value < trace[i - 1].value)) append_failure(failures, "I_h is not decreasing");
      }
      for (std::size_t i = 2; i < trace.size() && positive; ++i) {
        const double before = (log_i[i - 1] - log_i[i - 2]) / (log_h[i - 1] - log_h[i - 2]);
        const double after = (log_i[i] - log_i[i - 1]) / (log_h[i] - log_h[i - 1]);
        if (!(after < before)) append_failure(failures, "I_h decays no faster than a power of h");
      }
    }
    row.status = failures.empty() ? RowStatus::Ok : RowStatus::CheckFailed;
    row.message = failures;
  } catch (const HardyError& error) {
    row.status = RowStatus::SolverFail;
    row.message = error_text(error);
  }
  return row;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Constant: return "constant";
    case Command::Spectrum: return "spectrum";
    case Command::Verify: return "verify";
    case Command::Sweep: return "sweep";
    case Command::Table: return "table";
  }
  return "constant";
}

Command parse_command(std::string_view text) {
  for (auto command : {Command::Constant, Command::Spectrum, Command::Verify, Command::Sweep, Command::Table}) {
    if (text == to_string(command)) return command;
  }
  throw HardyError(ErrorKind::InvalidArgument, "unknown command '" + std::string(text) + "'");
}

std::string_view to_string(RowStatus status) {
  switch (status) {
    case RowStatus::Ok: return "ok";
    case RowStatus::NoClosedForm: return "no_closed_form";
    case RowStatus::SolverFail: return "solver_fail";
    case RowStatus::CheckFailed: return "check_failed";
  }
  return "ok";
}

RowStatus parse_status(std::string_view text) {
  for (auto status : {RowStatus::Ok, RowStatus::NoClosedForm, RowStatus::SolverFail, RowStatus::CheckFailed}) {
    if (text == to_string(status)) return status;
  }
  throw HardyError(ErrorKind::InvalidArgument, "unknown row status '" + std::string(text) + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw HardyError(ErrorKind::InvalidArgument, what); };
  if (mesh_size < 16) fail("mesh size must be >= 16");
  if (!(tolerance > 0.0)) fail("tolerance must be positive");
  if (jobs < 1) fail("jobs must be >= 1");
  for (double delta : delta_list) {
    if (!(delta > 0.0)) fail("deltas must be positive");
  }
  for (int h : h_list) {
    if (h < 1) fail("cutoff scales h must be >= 1");
  }
  if (axes.d.empty() || axes.k.empty() || axes.p.empty() || axes.a.empty() || axes.b.empty() || axes.cones.empty()) {
    fail("every parameter needs at least one value");
  }
  for (const auto& cone : axes.cones) parse_cone(cone);
  if (grid) {
    for (const auto& cell : *grid) parse_cone(cell.cone);
  }
  if (command == Command::Constant || command == Command::Spectrum || command == Command::Verify) {
    if (axes.d.size() > 1 || axes.k.size() > 1 || axes.p.size() > 1 || axes.a.size() > 1 || axes.b.size() > 1 ||
        axes.cones.size() > 1) {
      fail("lists of values are only accepted by sweep");
    }
    params_of(cell());
  }
}

GridCell RunConfig::cell() const {
  return {axes.d.front(), axes.k.front(), axes.p.front(), axes.a.front(), axes.b.front(), axes.cones.front()};
}

RunConfig resolve_config(Command command, const json& file_config, const ConfigOverrides& flags) {
  RunConfig config;
  config.command = command;
  if (!file_config.is_null()) {
    if (!file_config.is_object()) throw HardyError(ErrorKind::InvalidArgument, "config file must hold a JSON object");
    for (const auto& [key, value] : file_config.items()) {
      if (key == "d") config.axes.d = json_list<int>(value, key);
      else if (key == "k") config.axes.k = json_list<int>(value, key);
      else if (key == "p") config.axes.p = json_list<double>(value, key);
      else if (key == "a") config.axes.a = json_list<double>(value, key);
      else if (key == "b") config.axes.b = json_list<double>(value, key);
      else if (key == "cone" || key == "cones") config.axes.cones = json_strings(value, key);
      else if (key == "mesh") config.mesh_size = json_scalar<int>(value, key);
      else if (key == "deltas") config.delta_list = json_list<double>(value, key);
      else if (key == "hs") config.h_list = json_list<int>(value, key);
      else if (key == "format") config.format = parse_format(json_scalar<std::string>(value, key));
      else if (key == "out") config.output_path = json_scalar<std::string>(value, key);
      else if (key == "jobs") config.jobs = json_scalar<int>(value, key);
      else if (key == "tol") config.tolerance = json_scalar<double>(value, key);
      else if (key == "grid") {
        if (!value.is_array()) throw HardyError(ErrorKind::InvalidArgument, "config 'grid' must be an array");
        std::vector<GridCell> cells;
        for (const auto& entry : value) cells.push_back(cell_from_json(entry));
        config.grid = std::move(cells);
      } else if (key == "command" || key == "schema") {
        continue;
      } else {
        throw HardyError(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
      }
    }
  }
  if (flags.d) config.axes.d = parse_list<int>(*flags.d, "d");
  if (flags.k) config.axes.k = parse_list<int>(*flags.k, "k");
  if (flags.p) config.axes.p = parse_list<double>(*flags.p, "p");
  if (flags.a) config.axes.a = parse_list<double>(*flags.a, "a");
  if (flags.b) config.axes.b = parse_list<double>(*flags.b, "b");
  if (flags.cone) config.axes.cones = split_list(*flags.cone);
  if (flags.mesh) config.mesh_size = parse_number<int>(*flags.mesh, "mesh");
  if (flags.deltas) config.delta_list = parse_list<double>(*flags.deltas, "deltas");
  if (flags.hs) config.h_list = parse_list<int>(*flags.hs, "hs");
  if (flags.format) config.format = parse_format(*flags.format);
  if (flags.out) config.output_path = *flags.out;
  if (flags.jobs) config.jobs = parse_number<int>(*flags.jobs, "jobs");
  if (flags.tol) config.tolerance = parse_number<double>(*flags.tol, "tol");
  config.validate();
  return config;
}

json config_to_json(const RunConfig& config) {
  json j = {{"command", std::string(to_string(config.command))},
            {"d", config.axes.d},
            {"k", config.axes.k},
            {"p", config.axes.p},
            {"a", config.axes.a},
            {"b", config.axes.b},
            {"cones", config.axes.cones},
            {"mesh", config.mesh_size},
            {"deltas", config.delta_list},
            {"hs", config.h_list},
            {"format", config.format == OutputFormat::Json ? "json" : "csv"},
            {"out", config.output_path},
            {"jobs", config.jobs},
            {"tol", config.tolerance}};
  if (config.grid) {
    json cells = json::array();
    for (const auto& cell : *config.grid) cells.push_back(cell_to_json(cell));
    j["grid"] = cells;
  }
  return j;
}

// ---------------------------------------------------------------------------

json row_to_json(const ReportRow& row) {
  json trace = json::array();
  for (const auto& point : row.quotient_trace) trace.push_back({point.x, point.value});
  json j = cell_to_json(row.inputs);
  j["closed_form"] = optional_json(row.closed_form);
  j["closed_form_source"] = row.closed_form_source;
  j["numeric_M"] = optional_json(row.numeric_M);
  j["gap"] = optional_json(row.gap);
  j["lambda"] = optional_json(row.lambda);
  j["residual"] = optional_json(row.residual);
  j["iterations"] = optional_json(row.iterations);
  j["trace_kind"] = row.trace_kind;
  j["quotient_trace"] = trace;
  j["extrapolated"] = optional_json(row.extrapolated);
  j["fitted_rate"] = optional_json(row.fitted_rate);
  j["status"] = std::string(to_string(row.status));
  j["message"] = row.message;
  return j;
}

ReportRow row_from_json(const json& j) {
  ReportRow row;
  row.inputs = cell_from_json(j);
  row.closed_form = optional_from<double>(j, "closed_form");
  row.closed_form_source = j.at("closed_form_source").get<std::string>();
  row.numeric_M = optional_from<double>(j, "numeric_M");
  row.gap = optional_from<double>(j, "gap");
  row.lambda = optional_from<double>(j, "lambda");
  row.residual = optional_from<double>(j, "residual");
  row.iterations = optional_from<int>(j, "iterations");
  row.trace_kind = j.at("trace_kind").get<std::string>();
  for (const auto& point : j.at("quotient_trace")) {
    row.quotient_trace.push_back({point.at(0).get<double>(), point.at(1).get<double>()});
  }
  row.extrapolated = optional_from<double>(j, "extrapolated");
  row.fitted_rate = optional_from<double>(j, "fitted_rate");
  row.status = parse_status(j.at("status").get<std::string>());
  row.message = j.at("message").get<std::string>();
  return row;
}

// ---------------------------------------------------------------------------

ReportRow cmd_constant(const RunConfig& config) { return constant_row(config.cell(), config.mesh_size, config.tolerance); }

ReportRow cmd_spectrum(const RunConfig& config) {
  const auto cell = config.cell();
  const auto params = params_of(cell);
  const auto cone = parse_cone(cell.cone);
  require_admissible(params, cone);
  ReportRow row;
  row.inputs = cell;
  row.trace_kind = "mesh";
  if (auto closed = closed_form_constant(params, cone)) {
    row.closed_form = closed->value;
    row.closed_form_source = closed->source;
  }
  std::vector<int> meshes;
  for (int n : {config.mesh_size / 4, config.mesh_size / 2, config.mesh_size}) {
    if (n >= 16 && (meshes.empty() || meshes.back() != n)) meshes.push_back(n);
  }
  try {
    for (int n : meshes) {
      const auto result = solve_M(params, cone, n);
      row.quotient_trace.push_back({static_cast<double>(n), result.M});
      row.numeric_M = result.M;
      row.lambda = result.lambda;
      row.residual = result.residual;
      row.iterations = result.iterations;
    }
  } catch (const HardyError& error) {
    row.status = RowStatus::SolverFail;
    row.message = error_text(error);
  }
  if (row.closed_form && row.numeric_M) {
    row.gap = *row.numeric_M - *row.closed_form;
    std::vector<double> log_n, log_err;
    for (const auto& [n, m] : row.quotient_trace) {
      const double err = std::abs(m - *row.closed_form);
      if (err > 0.0) {
        log_n.push_back(std::log(n));
        log_err.push_back(std::log(err));
      }
    }
    if (log_n.size() >= 2 && log_n.size() == row.quotient_trace.size()) row.fitted_rate = least_squares_slope(log_n, log_err);
  }
  set_status_from_gap(row, config.tolerance);
  return row;
}

std::vector<ReportRow> cmd_verify(const RunConfig& config) {
  const auto cell = config.cell();
  require_admissible(params_of(cell), parse_cone(cell.cone));
  std::vector<ReportRow> rows{delta_row(cell, config)};
  if (!config.h_list.empty()) rows.push_back(h_row(cell, config));
  return rows;
}

std::vector<ReportRow> cmd_sweep(const RunConfig& config) {
  std::vector<GridCell> cells;
  for (int d : config.axes.d)
    for (int k : config.axes.k)
      for (double p : config.axes.p)
        for (double a : config.axes.a)
          for (double b : config.axes.b)
            for (const auto& cone : config.axes.cones) cells.push_back({d, k, p, a, b, cone});
  return evaluate_cells(cells, config);
}

std::vector<GridCell> builtin_table_grid() {
  std::vector<GridCell> cells;
  // Fractional Laplacian extension: d = n + 1, a = 1 - 2s.
  for (int n : {2, 3}) {
    for (double s : {0.25, 0.5, 0.75}) {
      cells.push_back({n + 1, 1, 2.0, 1.0 - 2.0 * s, 0.0, "full"});
      cells.push_back({n + 1, 1, 2.0, 1.0 - 2.0 * s, 0.0, "half-space"});
    }
  }
  // a = p - k, b = 0.
  cells.push_back({3, 1, 2.0, 1.0, 0.0, "full"});
  cells.push_back({4, 1, 3.0, 2.0, 0.0, "full"});
  cells.push_back({5, 2, 1.5, -0.5, 0.0, "full"});
  // Punctured space.
  cells.push_back({3, 1, 2.0, 0.0, 0.0, "punctured"});
  cells.push_back({4, 2, 3.0, 0.5, 1.0, "punctured"});
  cells.push_back({5, 2, 1.5, -0.5, 0.5, "punctured"});
  // Complement of {y = 0}, p = 2.
  cells.push_back({3, 1, 2.0, 0.0, 0.0, "complement-sigma0"});
  cells.push_back({4, 1, 2.0, 0.5, 0.0, "complement-sigma0"});
  cells.push_back({5, 1, 2.0, -0.5, 1.0, "complement-sigma0"});
  cells.push_back({4, 2, 2.0, -0.5, 0.0, "complement-sigma0"});
  // Superdegenerate: removing {y = 0} changes nothing.
  cells.push_back({3, 1, 2.0, 1.5, 0.0, "complement-sigma0"});
  cells.push_back({3, 1, 3.0, 2.0, 0.0, "complement-sigma0"});
  cells.push_back({3, 1, 2.0, 1.5, 0.0, "half-space"});
  cells.push_back({3, 1, 2.0, 0.0, 0.0, "half-space"});
  return cells;
}

std::vector<ReportRow> cmd_table(const RunConfig& config) {
  return evaluate_cells(config.grid ? *config.grid : builtin_table_grid(), config);
}

std::vector<ReportRow> run(const RunConfig& config) {
  switch (config.command) {
    case Command::Constant: return {cmd_constant(config)};
    case Command::Spectrum: return {cmd_spectrum(config)};
    case Command::Verify: return cmd_verify(config);
    case Command::Sweep: return cmd_sweep(config);
    case Command::Table: return cmd_table(config);
  }
  return {};
}

int exit_code(const std::vector<ReportRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& row) { return row.status == RowStatus::Ok; }) ? 0 : 1;
}

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return ec == std::errc{} ? std::string(buffer, ptr) : std::string("nan");
}

std::string render_json(const RunConfig& config, const std::vector<ReportRow>& rows) {
  json out_rows = json::array();
  for (const auto& row : rows) out_rows.push_back(row_to_json(row));
  const json report = {{"schema", 1}, {"config", config_to_json(config)}, {"rows", out_rows}};
  return report.dump(2) + "\n";
}

std::string render_csv(const std::vector<ReportRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  auto quote = [](const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  };
  std::string out = std::string(kCsvColumns) + "\n";
  for (const auto& row : rows) {
    std::string trace;
    for (const auto& point : row.quotient_trace) {
      if (!trace.empty()) trace += ';';
      trace += format_double(point.x) + ":" + format_double(point.value);
    }
    const auto& in = row.inputs;
    out += std::to_string(in.d) + "," + std::to_string(in.k) + "," + format_double(in.p) + "," + format_double(in.a) +
           "," + format_double(in.b) + "," + quote(in.cone) + "," + opt(row.closed_form) + "," +
           quote(row.closed_form_source) + "," + opt(row.numeric_M) + "," + opt(row.gap) + "," + opt(row.lambda) + "," +
           opt(row.residual) + "," + (row.iterations ? std::to_string(*row.iterations) : std::string()) + "," +
           row.trace_kind + "," + trace + "," + opt(row.extrapolated) + "," + opt(row.fitted_rate) + "," +
           std::string(to_string(row.status)) + "," + quote(row.message) + "\n";
  }
  return out;
}

std::string render(const RunConfig& config, const std::vector<ReportRow>& rows) {
  return config.format == OutputFormat::Json ? render_json(config, rows) : render_csv(rows);
}

void write_atomically(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw HardyError(ErrorKind::Io, "cannot open '" + temp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw HardyError(ErrorKind::Io, "write to '" + temp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp);
    throw HardyError(ErrorKind::Io, "cannot move report into '" + path + "': " + ec.message());
  }
}

json error_object(const HardyError& error) {
  return {{"schema", 1}, {"error", {{"kind", std::string(to_string(error.kind()))}, {"message", error.what()}}}};
}

}  // namespace hardy
