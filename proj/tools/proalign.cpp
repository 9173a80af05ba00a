#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "proalign/commands.hpp"
#include "proalign/errors.hpp"

using namespace proalign;

int main(int argc, char** argv) {
  CLI::App app{"Preference alignment losses, oracles and desk-scale experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> only;
  bool inject_bug = false;
  std::vector<std::string> runs;

  auto add_common = [&](CLI::App* sub, bool need_out) {
    sub->add_option("--config", config_path, "Run config (INI-style key = value sections)");
    auto* o = sub->add_option("--out", out, "Output directory");
    if (need_out) o->required();
    sub->add_option("--seed", seed, "Override [run] seed");
  };
  auto* gen = app.add_subcommand("gen", "Generate a world and a feedback dataset");
  add_common(gen, true);
  auto* verify = app.add_subcommand("verify", "Run the theorem verification suite");
  add_common(verify, false);
  verify->add_option("--only", only, "Run a single check (t31 t32 t33 t41 t42 b2 t43 probe fd)");
  // Mutation switch for sanity testing; deliberately absent from --help.
  verify->add_flag("--inject-bug", inject_bug)->group("");
  auto* train = app.add_subcommand("train", "Train a policy on a generated dataset");
  add_common(train, true);
  auto* report = app.add_subcommand("report", "Merge run directories into comparison tables");
  report->add_option("--out", out, "Output directory")->required();
  report->add_option("runs", runs, "Run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) config.seed = *seed;
    if (gen->parsed()) {
      cmd_gen(config, out);
      std::cout << "wrote " << out << "/{world.txt,dataset.txt,manifest.json}\n";
      return kExitOk;
    }
    if (verify->parsed()) {
      return cmd_verify(config, only, inject_bug, out.empty() ? std::nullopt : std::optional<std::string>(out),
                        std::cout);
    }
    if (train->parsed()) {
      const int code = cmd_train(config, out);
      std::cout << "wrote " << out << (code == kExitNumerical ? " (training diverged)" : "") << '\n';
      return code;
    }
    cmd_report(runs, out, std::cout);
    return kExitOk;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
