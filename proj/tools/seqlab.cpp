#include "runner/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>

#ifndef SEQLAB_VERSION
#define SEQLAB_VERSION "unknown"
#endif

using namespace seqlab::runner;

int main(int argc, char** argv) {
  CLI::App app{"seqlab: RNN inversion, concept and language-learning experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SEQLAB_VERSION);

  struct Bound {
    const ExperimentDef* def = nullptr;
    CLI::App* sub = nullptr;
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Bound> bound(experiments().size());
  for (std::size_t i = 0; i < experiments().size(); ++i) {
    Bound& b = bound[i];
    b.def = &experiments()[i];
    b.sub = app.add_subcommand(b.def->name, b.def->description);
    b.sub->add_option("--config", b.config_file, "key = value file; command-line flags override it");
    for (const auto& spec : b.def->options) {
      const std::string help = spec.help + " [" + spec.default_value + "]";
      if (spec.flag) {
        b.options[spec.key] = b.sub->add_flag("--" + spec.key, b.flags[spec.key], help);
      } else {
        b.options[spec.key] = b.sub->add_option("--" + spec.key, b.values[spec.key], help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: kind=config subcommand=" << (argc > 1 ? argv[1] : "") << " message=" << e.what() << '\n';
    return 2;
  }

  for (auto& b : bound) {
    if (!b.sub->parsed()) continue;
    ExperimentConfig cfg = default_config(*b.def);
    try {
      if (!b.config_file.empty()) cfg.load_file(b.config_file);
      for (const auto& spec : b.def->options) {
        if (b.options[spec.key]->count() == 0) continue;
        cfg.set(spec.key, spec.flag ? (b.flags[spec.key] ? "true" : "false") : b.values[spec.key]);
      }
      if (const char* env = std::getenv("SEQLAB_SEED"); env && *env) cfg.set("seed", env);
    } catch (const ConfigError& e) {
      std::cerr << "error: kind=config subcommand=" << b.def->name << " message=" << e.what() << '\n';
      return 2;
    }
    return run_experiment(cfg, SEQLAB_VERSION, std::cout, std::cerr);
  }
  return 2;
}
