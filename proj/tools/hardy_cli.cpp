// hardy: sharp constants of mixed-weight Hardy inequalities on cones.
//
//   hardy constant --d 3 --k 1 --p 2 --a 0 --b 0 --cone complement-sigma0
//   hardy sweep --d 3,4 --a 0,0.5 --cone punctured,complement-sigma0 --jobs 4
//   hardy table --format csv --out table.csv
//
// Exit status: 0 when every row is ok, 1 when some row is not, 2 on an error
// (printed as a JSON error object on standard output).

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "hardy/report.hpp"

namespace {

nlohmann::json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hardy::HardyError(hardy::ErrorKind::Io, "cannot read config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw hardy::HardyError(hardy::ErrorKind::InvalidArgument, "config file '" + path + "': " + e.what());
  }
}

struct FlagSpec {
  const char* name;
  const char* help;
  std::optional<std::string> hardy::ConfigOverrides::*field;
};

const FlagSpec kFlags[] = {
    {"--d", "ambient dimension d (comma list for sweep)", &hardy::ConfigOverrides::d},
    {"--k", "codimension k of {y = 0}", &hardy::ConfigOverrides::k},
    {"--p", "exponent p > 1", &hardy::ConfigOverrides::p},
    {"--a", "cylindrical weight exponent a", &hardy::ConfigOverrides::a},
    {"--b", "spherical weight exponent b", &hardy::ConfigOverrides::b},
    {"--cone", "full | punctured | complement-sigma0 | half-space | band:<t1>:<t2>", &hardy::ConfigOverrides::cone},
    {"--mesh", "angular mesh elements (>= 16, default 512)", &hardy::ConfigOverrides::mesh},
    {"--deltas", "u_delta parameters, e.g. 0.2,0.1,0.05", &hardy::ConfigOverrides::deltas},
    {"--hs", "cutoff scales h, e.g. 4,8,16", &hardy::ConfigOverrides::hs},
    {"--format", "json | csv", &hardy::ConfigOverrides::format},
    {"--out", "output file (written atomically); default stdout", &hardy::ConfigOverrides::out},
    {"--jobs", "concurrent cells for sweep and table", &hardy::ConfigOverrides::jobs},
    {"--tol", "gap tolerance (default 1e-3)", &hardy::ConfigOverrides::tol},
};

// Raw flag text, shared by all subcommands (only one runs).
struct FlagValues {
  std::string values[std::size(kFlags)];
  std::string config_path;
};

void add_flags(CLI::App* sub, FlagValues& values) {
  for (std::size_t i = 0; i < std::size(kFlags); ++i) sub->add_option(kFlags[i].name, values.values[i], kFlags[i].help);
  sub->add_option("--config", values.config_path, "JSON config file; flags override its values");
}

hardy::ConfigOverrides collect(const CLI::App* sub, const FlagValues& values) {
  hardy::ConfigOverrides overrides;
  for (std::size_t i = 0; i < std::size(kFlags); ++i) {
    if (sub->count(kFlags[i].name) > 0) overrides.*kFlags[i].field = values.values[i];
  }
  return overrides;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp constants of mixed-weight Hardy inequalities on cones"};
  app.require_subcommand(1);
  app.footer(std::string("CSV columns: ") + hardy::kCsvColumns +
             "\nquotient_trace is a ';'-separated list of x:value pairs; empty cells mean absent values.");

  FlagValues flags;
  const std::vector<std::pair<hardy::Command, std::string>> commands = {
      {hardy::Command::Constant, "closed form and numeric sharp constant"},
      {hardy::Command::Spectrum, "mesh refinement trace of the spherical minimum"},
      {hardy::Command::Verify, "u_delta quotient trace and cutoff strip energies"},
      {hardy::Command::Sweep, "constant over the Cartesian product of comma lists"},
      {hardy::Command::Table, "closed forms against numerics over a grid"},
  };
  for (const auto& [command, help] : commands) {
    add_flags(app.add_subcommand(std::string(hardy::to_string(command)), help), flags);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const auto* sub = app.get_subcommands().front();
    const auto command = hardy::parse_command(sub->get_name());
    const auto file_config = flags.config_path.empty() ? nlohmann::json() : read_config_file(flags.config_path);
    const auto config = hardy::resolve_config(command, file_config, collect(sub, flags));
    const auto rows = hardy::run(config);
    const auto text = hardy::render(config, rows);
    if (config.output_path.empty()) {
      std::cout << text;
    } else {
      hardy::write_atomically(config.output_path, text);
    }
    return hardy::exit_code(rows);
  } catch (const hardy::HardyError& error) {
    std::cout << hardy::error_object(error).dump(2) << "\n";
    return 2;
  }
}
