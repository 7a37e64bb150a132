#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "greenforms/errors.hpp"
#include "greenforms/report.hpp"
#include "runner.hpp"

namespace gf = greenforms;
namespace cli = greenforms::cli;

int main(int argc, char** argv) {
  CLI::App app{"greenforms: discrete Green forms and Sobolev experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int refinements = -1;
  app.add_option("--config", config_path, "INI experiment config");
  app.add_option("--seed", seed, "ensemble seed (overrides run.seed)");
  app.add_option("--out-dir", out_dir, "output directory (overrides GREENFORMS_OUT_DIR and run.out_dir)");
  app.add_option("--refinements", refinements, "extra refinement levels, each doubling the resolution")
      ->check(CLI::NonNegativeNumber);
  app.fallthrough();
  for (const auto& name : cli::kSubcommands) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  cli::RunOptions opt;
  opt.experiment = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) opt.config = cli::Config::load(config_path);
    opt.seed = app.count("--seed") ? seed : opt.config.u64("run.seed", 1);
    opt.refinements = refinements >= 0 ? refinements : opt.config.integer("run.refinements", 0);
    if (opt.refinements < 0) throw gf::Error(gf::ErrorCode::ConfigParse, "run.refinements must be >= 0");
    if (!out_dir.empty()) opt.out_dir = out_dir;
    else if (const char* env = std::getenv("GREENFORMS_OUT_DIR"); env && *env) opt.out_dir = env;
    else opt.out_dir = opt.config.str("run.out_dir", ".");

    const cli::RunResult result = cli::run_experiment(opt);
    gf::write_text(opt.out_dir / "manifest.json", cli::manifest_json(opt, result));
    for (const auto& f : result.outputs) std::cout << (opt.out_dir / f).string() << '\n';
    if (!result.failures.empty()) {
      std::cerr << opt.experiment << ": " << result.failures.size() << " assertion(s) failed\n";
      for (const auto& f : result.failures) std::cerr << "  " << f << '\n';
      return 2;
    }
    return 0;
  } catch (const gf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: MissingInput: " << e.what() << '\n';
    return 1;
  }
}
