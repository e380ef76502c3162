#pragma once

#include <string>

#include "dcg/checks.hpp"

namespace dcg::cli {

struct CliConfig {
  ConstructionConfig construction;
  SolveOptions solve;
  std::string out_dir = ".";
  std::string report;  // JSON path; empty writes to stdout
  bool timings = true;
};

// Sections [construction], [solve], [output]. Unknown keys and wrong types throw ConfigError.
CliConfig load_config(const std::string& path);

RhoReading parse_rho_reading(const std::string& s);
ZetaMode parse_zeta_mode(const std::string& s);

}  // namespace dcg::cli
