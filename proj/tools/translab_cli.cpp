// translab command-line entry point.
//
// Exit status: 0 when every check passes, 1 when a check fails, 2 on usage,
// configuration or library errors.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "translab/translab.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsage = 2;

struct Invocation {
  std::string subcommand;
  std::string config_flag;
  std::string config_positional;
  std::string out;
  std::vector<std::string> overrides;
  bool quiet = false;
};

translab::ConfigText load_text(const Invocation& inv) {
  if (!inv.config_flag.empty() && !inv.config_positional.empty() && inv.config_flag != inv.config_positional)
    throw translab::ConfigError("config given both as argument and via --config");
  const std::string path = inv.config_flag.empty() ? inv.config_positional : inv.config_flag;
  translab::ConfigText text;
  if (!path.empty()) text = translab::ConfigText::load(path);
  for (const auto& o : inv.overrides) text.set(o);
  return text;
}

std::filesystem::path output_dir(const Invocation& inv, const translab::StudyConfig& cfg) {
  if (!inv.out.empty()) return inv.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* root = std::getenv("TRANSLAB_OUT_ROOT"); root && *root)
    return std::filesystem::path(root) / inv.subcommand;
  return std::filesystem::path("translab-out") / inv.subcommand;
}

void print_outcome(const translab::StudyOutcome& out, const std::filesystem::path& dir) {
  for (const auto& c : out.checks)
    std::printf("%-4s %-40s %s %s %s  [%s; %s]\n", c.pass ? "ok" : "FAIL", c.name.c_str(),
                translab::format_short(c.value).c_str(), c.relation.c_str(),
                translab::format_short(c.tolerance).c_str(), c.reference.c_str(), c.invariant.c_str());
  std::printf("%s: %s (%s)\n", out.study.c_str(), out.pass() ? "PASS" : "FAIL", dir.string().c_str());
}

int run(const Invocation& inv) {
  const translab::StudyConfig cfg = translab::read_study_config(load_text(inv));
  if (inv.subcommand == "validate-config") {
    if (!inv.quiet)
      for (const auto& [k, v] : cfg.resolved) std::printf("%s = %s\n", k.c_str(), v.c_str());
    return kPass;
  }
  const std::filesystem::path dir = output_dir(inv, cfg);
  translab::StudyOutcome outcome;
  if (inv.subcommand == "conservation") outcome = translab::run_conservation_study(cfg, dir);
  else if (inv.subcommand == "mollify") outcome = translab::run_mollification_study(cfg, dir);
  else if (inv.subcommand == "renorm") outcome = translab::run_renormalization_study(cfg, dir);
  else if (inv.subcommand == "stability") outcome = translab::run_stability_study(cfg, dir);
  else outcome = translab::run_solve(cfg, dir);
  if (!inv.quiet) print_outcome(outcome, dir);
  return outcome.pass() ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  Invocation inv;
  CLI::App app{"Numerical verification studies for transport by divergence-free velocity fields.", "translab"};
  app.require_subcommand(1, 1);
  app.add_option("--config", inv.config_flag, "Study configuration file (sections and key = value lines)");
  app.add_option("--out", inv.out, "Output directory (default: output.dir, else $TRANSLAB_OUT_ROOT/<study>, else "
                                   "./translab-out/<study>)");
  app.add_option("--set", inv.overrides, "Override a config value, written section.key=value (repeatable)")
      ->allow_extra_args(false);
  app.add_flag("--quiet", inv.quiet, "Suppress per-check output");

  const std::vector<std::pair<std::string, std::string>> subcommands{
      {"conservation", "Classical solve with norm conservation, max principle and flow reversibility checks"},
      {"mollify", "Commutator remainder decay and mollified-equation identity"},
      {"renorm", "Weak and renormalized residuals over test-function and nonlinearity banks"},
      {"stability", "Stability of the solution map under a perturbation family"},
      {"solve", "Bare classical solve with layer dumps"},
      {"validate-config", "Parse and validate a configuration, then echo the resolved values"},
  };
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("config", inv.config_positional, "Study configuration file");
    sub->callback([&inv, name = name] { inv.subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    return run(inv);
  } catch (const translab::ConfigError& e) {
    std::cerr << "translab: config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "translab: error: " << e.what() << '\n';
  }
  return kUsage;
}
