#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hardy/report.hpp"

using namespace hardy;

namespace {

RunConfig single(Command command, GridCell cell) {
  ConfigOverrides flags;
  flags.d = std::to_string(cell.d);
  flags.k = std::to_string(cell.k);
  flags.p = format_double(cell.p);
  flags.a = format_double(cell.a);
  flags.b = format_double(cell.b);
  flags.cone = cell.cone;
  return resolve_config(command, nlohmann::json(), flags);
}

}  // namespace

TEST_CASE("commands and statuses round trip through their names") {
  for (auto c : {Command::Constant, Command::Spectrum, Command::Verify, Command::Sweep, Command::Table}) {
    CHECK(parse_command(to_string(c)) == c);
  }
  for (auto s : {RowStatus::Ok, RowStatus::NoClosedForm, RowStatus::SolverFail, RowStatus::CheckFailed}) {
    CHECK(parse_status(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_command("plot"), HardyError);
}

TEST_CASE("config precedence: defaults, then file, then flags") {
  const auto defaults = resolve_config(Command::Constant, nlohmann::json(), {});
  CHECK(defaults.mesh_size == 512);
  CHECK(defaults.cell() == GridCell{});

  const nlohmann::json file = {{"d", 5}, {"a", 0.5}, {"mesh", 128}, {"cone", "complement-sigma0"}, {"tol", 1e-4}};
  ConfigOverrides flags;
  flags.d = "4";
  flags.mesh = "64";
  const auto config = resolve_config(Command::Constant, file, flags);
  CHECK(config.cell().d == 4);
  CHECK(config.cell().a == 0.5);
  CHECK(config.cell().cone == "complement-sigma0");
  CHECK(config.mesh_size == 64);
  CHECK(config.tolerance == 1e-4);

  CHECK_THROWS_AS(resolve_config(Command::Constant, {{"dimension", 3}}, {}), HardyError);
  ConfigOverrides lists;
  lists.d = "3,4";
  CHECK_THROWS_AS(resolve_config(Command::Constant, nlohmann::json(), lists), HardyError);
  CHECK(resolve_config(Command::Sweep, nlohmann::json(), lists).axes.d == std::vector<int>{3, 4});
  ConfigOverrides bad;
  bad.mesh = "many";
  CHECK_THROWS_AS(resolve_config(Command::Constant, nlohmann::json(), bad), HardyError);
  bad = {};
  bad.format = "xml";
  CHECK_THROWS_AS(resolve_config(Command::Constant, nlohmann::json(), bad), HardyError);

  // the config written into a report resolves back to itself
  const auto again = resolve_config(Command::Constant, config_to_json(config), {});
  CHECK(config_to_json(again) == config_to_json(config));
}

TEST_CASE("rows round trip through JSON") {
  ReportRow row;
  row.inputs = {4, 2, 3.0, -0.5, 0.25, "band:0.1:1.2"};
  row.numeric_M = 0.1 + 0.2;
  row.iterations = 17;
  row.trace_kind = "delta";
  row.quotient_trace = {{0.2, 1.0 / 3.0}, {0.1, 2.0 / 7.0}};
  row.fitted_rate = -1e-300;
  row.status = RowStatus::NoClosedForm;
  row.message = "quote \" and, comma";
  CHECK(row_from_json(row_to_json(row)) == row);
  const auto j = row_to_json(row);
  CHECK(j.at("closed_form").is_null());
  CHECK(j.at("status") == "no_closed_form");

  const auto computed = cmd_constant(single(Command::Constant, {3, 1, 2.0, 0.3, 0.1, "complement-sigma0"}));
  CHECK(row_from_json(nlohmann::json::parse(row_to_json(computed).dump())) == computed);
}

TEST_CASE("doubles are written in round-trip form") {
  for (double x : {0.1, 1.0 / 3.0, 2.25, 1e-300, -123456.789, 4.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(2.25) == "2.25");
}

TEST_CASE("constant rows") {
  const auto row = cmd_constant(single(Command::Constant, {3, 1, 2.0, 0.0, 0.0, "complement-sigma0"}));
  CHECK(*row.closed_form == doctest::Approx(2.25));
  CHECK(std::abs(*row.gap) < 1e-5);
  CHECK(row.status == RowStatus::Ok);
  const auto band = cmd_constant(single(Command::Constant, {3, 1, 2.0, 0.0, 0.0, "band:0.2:1.0"}));
  CHECK(band.status == RowStatus::NoClosedForm);
  CHECK(band.numeric_M);
  CHECK(exit_code({row, band}) == 1);
  CHECK(exit_code({row}) == 0);
  CHECK(exit_code({}) == 0);
  CHECK_THROWS_AS(cmd_constant(single(Command::Constant, {3, 2, 2.0, -3.0, 0.0, "full"})), HardyError);

  auto strict = single(Command::Constant, {3, 1, 2.0, 0.0, 0.0, "complement-sigma0"});
  strict.mesh_size = 16;
  strict.tolerance = 1e-12;
  CHECK(cmd_constant(strict).status == RowStatus::CheckFailed);
}

TEST_CASE("spectrum trace") {
  const auto row = cmd_spectrum(single(Command::Spectrum, {3, 1, 2.0, 0.0, 0.0, "complement-sigma0"}));
  CHECK(row.trace_kind == "mesh");
  REQUIRE(row.quotient_trace.size() == 3);
  CHECK(row.quotient_trace.back().x == 512.0);
  CHECK(row.fitted_rate);
  CHECK(*row.fitted_rate < -1.0);
}

TEST_CASE("verify rows") {
  auto config = single(Command::Verify, {3, 1, 2.0, 0.0, 0.0, "complement-sigma0"});
  auto rows = cmd_verify(config);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == RowStatus::Ok);
  CHECK(rows[0].quotient_trace.size() == 3);
  CHECK(*rows[0].fitted_rate == doctest::Approx(2.0).epsilon(1e-6));

  config.delta_list.clear();
  rows = cmd_verify(config);
  CHECK(rows[0].status == RowStatus::Ok);
  CHECK(rows[0].quotient_trace.empty());

  auto threshold = single(Command::Verify, {3, 1, 2.0, 1.0, 0.0, "complement-sigma0"});
  threshold.h_list = {4, 8, 16};
  rows = cmd_verify(threshold);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].trace_kind == "h");
  CHECK(rows[1].status == RowStatus::Ok);
  CHECK(*rows[1].fitted_rate == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("table of known closed forms") {
  RunConfig config = resolve_config(Command::Table, nlohmann::json(), {});
  config.jobs = 4;
  const auto rows = cmd_table(config);
  REQUIRE(rows.size() == builtin_table_grid().size());
  for (const auto& row : rows) {
    CHECK_MESSAGE(row.status == RowStatus::Ok, row.inputs.cone, " ", row.message);
  }
  // fractional Laplacian extension: ((n -+ 2s)/2)^2
  CHECK(*rows[0].closed_form == doctest::Approx(std::pow((2 - 0.5) / 2, 2)));
  CHECK(*rows[1].closed_form == doctest::Approx(std::pow((2 + 0.5) / 2, 2)));

  config.grid = std::vector<GridCell>{};
  CHECK(cmd_table(config).empty());
  CHECK(exit_code(cmd_table(config)) == 0);
}

TEST_CASE("sweeps are deterministic and independent of the job count") {
  ConfigOverrides flags;
  flags.d = "3,4";
  flags.a = "0,0.4";
  flags.cone = "punctured,complement-sigma0,band:0.3:1.1";
  flags.mesh = "128";
  auto config = resolve_config(Command::Sweep, nlohmann::json(), flags);
  const auto serial = render(config, cmd_sweep(config));
  config.jobs = 3;
  const auto parallel = render(config, cmd_sweep(config));
  config.jobs = 1;
  CHECK(render(config, cmd_sweep(config)) == serial);
  config.jobs = 3;
  CHECK(render(config, cmd_sweep(config)) == parallel);
  CHECK(cmd_sweep(config).size() == 12);
  CHECK(cmd_sweep(config) == cmd_sweep(resolve_config(Command::Sweep, nlohmann::json(), flags)));
}

TEST_CASE("CSV rendering") {
  ReportRow row;
  row.inputs = {3, 1, 2.0, 0.0, 0.0, "punctured"};
  row.closed_form = 0.25;
  row.quotient_trace = {{0.1, 0.26}, {0.05, 0.2525}};
  row.message = "a, \"b\"";
  const auto csv = render_csv({row});
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header == kCsvColumns);
  CHECK(line.rfind("3,1,2,0,0,punctured,0.25,,,", 0) == 0);
  CHECK(line.find("0.1:0.26;0.05:0.2525") != std::string::npos);
  CHECK(line.find("\"a, \"\"b\"\"\"") != std::string::npos);
}

TEST_CASE("JSON report layout") {
  const auto config = single(Command::Constant, {3, 1, 2.0, 0.0, 0.0, "punctured"});
  const auto j = nlohmann::json::parse(render_json(config, run(config)));
  CHECK(j.at("schema") == 1);
  CHECK(j.at("config").at("command") == "constant");
  CHECK(j.at("rows").size() == 1);
  const auto err = error_object(HardyError(ErrorKind::Inadmissible, "no"));
  CHECK(err.at("schema") == 1);
  CHECK(err.at("error").at("kind") == "inadmissible");
  CHECK(err.at("error").at("message") == "no");
}

TEST_CASE("atomic writes") {
  const auto dir = std::filesystem::temp_directory_path() / "hardy_report_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "out.json").string();
  write_atomically(path, "first");
  write_atomically(path, "second");
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text == "second");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) CHECK(entry.path().filename() == "out.json");
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(write_atomically("/nonexistent-dir/x.json", "x"), HardyError);
}
