#pragma once

#include "rplace/harness.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rplace {

/// Experiments selected by one config file; `experiment: all` and `mode: both`
/// expand to several runs that share the base seed.
struct RunPlan {
  std::vector<ExperimentConfig> runs;
};

/// Scripted multi-cube scene for `run-arrangement` and `render-debug`.
struct Scenario {
  NoiseMode mode = NoiseMode::sim;
  std::uint64_t seed = 1;
  NoiseProfile noise = NoiseProfile::preset(NoiseMode::sim);
  ErrorSpec pick_error;
  CorrectionConfig correction;
  CameraModel camera = CameraModel::top_down();
  TableBounds table;
  GripperModel gripper;
  ContactModel contact;
  double cube_edge = 0.05;
  std::vector<DemoCube> cubes;

  void validate() const;
};

/// Parses YAML text. Overrides are `dotted.key=value` pairs applied to the
/// parsed document before validation. Errors are ConfigError with a
/// "<source>:<line>: " prefix when a line is known.
RunPlan parse_run_plan(std::string_view text, std::span<const std::string> overrides = {},
                       std::string_view source = "<config>");
RunPlan load_run_plan(const std::filesystem::path& path, std::span<const std::string> overrides = {});

Scenario parse_scenario(std::string_view text, std::span<const std::string> overrides = {},
                        std::string_view source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// True if the document looks like a scenario (it has a `cubes` list).
bool is_scenario_document(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace rplace
