#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bubble/driver.hpp"
#include "bubble/families.hpp"

namespace bubble {

/// Validated run configuration. See README for the file grammar.
struct RunConfig {
  FamilySpec family;
  DriverConfig driver;
  double eps0 = 0.5;
  double eps0_prime = 0.5;
  double eps0_double_prime = 0.5;
  std::string output_dir;              // empty when not given
  std::optional<std::int64_t> seed;    // unused by the deterministic pipeline
  std::string canonical_json;          // normalized config, sorted keys, defaults filled
  std::string hash;                    // FNV-1a 64 of canonical_json, hex
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies `key=value[,key=value...]` to the tolerances block and re-validates.
void apply_tol_overrides(RunConfig& config, const std::string& overrides);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace bubble
