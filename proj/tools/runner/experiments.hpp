#pragma once

#include "config.hpp"
#include "output.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace seqlab::runner {

struct ExperimentOutput {
  std::vector<Table> tables;
  std::vector<Chart> charts;
  std::vector<std::string> summary;  ///< human-readable lines for stdout
};

struct ExperimentDef {
  std::string name;
  std::string description;
  std::vector<OptionSpec> options;  ///< includes the common ones
  ExperimentOutput (*run)(const ExperimentConfig&);
};

const std::vector<ExperimentDef>& experiments();
const ExperimentDef& find_experiment(const std::string& name);

/// Fresh config with the experiment's defaults.
ExperimentConfig default_config(const ExperimentDef& def);

/// Runs the experiment, writes CSVs (and SVGs when plot=true) into the
/// configured output directory and returns the exit code: 0 success,
/// 2 config error, 3 numeric failure. Errors are reported on `err` as one
/// line "error: kind=<config|numeric> subcommand=<name> message=<text>".
int run_experiment(const ExperimentConfig& cfg, const std::string& version, std::ostream& out,
                   std::ostream& err);

}  // namespace seqlab::runner
