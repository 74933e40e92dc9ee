#include <ostream>

#include <CLI11.hpp>

#include "arrival/error.hpp"
#include "arrival/runner/run.hpp"

namespace arrival::runner {

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Arrival-time experiments on a periodic 1D grid", "arrival"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "arrival_out";
  unsigned workers = 1;
  bool print_config = false;

  for (const auto& name : kind_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config,-c", config_path, "JSON config file (defaults apply when omitted)");
    sub->add_option("--set,-s", overrides, "override a dotted key, e.g. partition.epsilon=0.5")
        ->allow_extra_args(false);
    sub->add_option("--out,-o", out_dir, "output directory");
    sub->add_option("--workers,-j", workers, "threads for scan points")->check(CLI::PositiveNumber);
    sub->add_flag("--print-config", print_config, "print the resolved config and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "arrival: " << e.what() << "\n";
    return kExitConfig;
  }

  const auto& subs = app.get_subcommands();
  const ExperimentKind kind = parse_kind(subs.front()->get_name());
  try {
    const json file = config_path.empty() ? json::object() : load_config_file(config_path);
    if (print_config) {
      json doc = resolve_config(file, overrides);
      if (kind == ExperimentKind::scan) {
        validate_scan(doc);
      } else {
        validate(kind, doc);
      }
      out << to_json_text(doc, 2) << "\n";
      return kExitOk;
    }
    execute(kind, file, overrides, out_dir, workers, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "arrival: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "arrival: invalid parameters: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "arrival: numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "arrival: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace arrival::runner
