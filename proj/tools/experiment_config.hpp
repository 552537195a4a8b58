#pragma once

// Run configuration shared by every subcommand. Files are INI-style:
//
//   [switch]
//   num_ports = 8
//   buffer_size = 64
//
// Every key can also be set from the command line as section.key=value.

#include <cstdint>
#include <string>
#include <vector>

#include "shbuf/core.hpp"
#include "shbuf/policies.hpp"
#include "shbuf/workloads.hpp"

namespace shbuf::cli {

struct ExperimentConfig {
  SwitchConfig switch_config{8, 64};

  WorkloadSpec workload;
  // Arrival trace to load instead of generating the workload.
  std::string trace;

  std::string policy = "lqd";  // cs, dt, lqd, followlqd, credence
  Rational dt_alpha{1, 2};
  std::uint32_t ewma_window = 16;

  std::string oracle = "perfect";  // perfect, constant_drop, constant_accept, flip, forest
  double flip_p = 0.0;
  std::string model;               // forest model file
  std::string fallback = "accept"; // decision when the oracle cannot answer

  std::uint32_t trees = 4;
  std::uint32_t max_depth = 4;
  double split = 0.6;

  std::vector<double> p_values{0.0, 0.1, 0.3, 0.5, 0.7};
  std::uint32_t sweep_seeds = 10;

  std::uint64_t seed = 1;
  std::string out_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;

  // Sets one key; throws ValidationError on unknown keys or bad values.
  void set(const std::string& section, const std::string& key, const std::string& value);
  // "section.key=value"
  void set_assignment(const std::string& assignment);

  // Cross-field checks. Called before any command does work.
  void validate() const;

  // All keys in a fixed order; parse_config(to_ini()) reproduces *this.
  std::string to_ini() const;
};

// `keys_seen`, when given, receives every section.key present in the text.
ExperimentConfig parse_config(const std::string& text,
                              std::vector<std::string>* keys_seen = nullptr);
ExperimentConfig load_config(const std::string& path,
                             std::vector<std::string>* keys_seen = nullptr);

std::string format_double(double v);
std::vector<double> parse_double_list(const std::string& text);
std::vector<std::uint32_t> parse_uint_list(const std::string& text);

}  // namespace shbuf::cli
