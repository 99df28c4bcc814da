#pragma once

#include "rplace/camera.hpp"
#include "rplace/controller.hpp"
#include "rplace/injection.hpp"
#include "rplace/world.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rplace {

enum class ExperimentKind { nominal, translation, orientation, estimator_proxy, arrangement_demo };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

/// The four single-cube experiments, in table order.
inline constexpr std::array<ExperimentKind, 4> kTableExperiments = {
    ExperimentKind::nominal, ExperimentKind::translation, ExperimentKind::orientation,
    ExperimentKind::estimator_proxy};

/// Pick error injected by a single-cube experiment.
InjectionKind injection_for(ExperimentKind kind);

struct DemoCube {
  std::string id;
  CubeColor color = CubeColor::red;
  PlanarPose start;
  PlanarPose target;
};

/// Four differently colored cubes scattered on one side of the table and a
/// 2x2 target pattern on the other.
std::vector<DemoCube> default_demo_layout();

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::nominal;
  NoiseMode mode = NoiseMode::sim;
  int trials = 100;
  std::uint64_t base_seed = 1;
  std::filesystem::path output_dir = "out";

  NoiseProfile noise = NoiseProfile::preset(NoiseMode::sim);
  ErrorSpec pick_error;  // kind is taken from `experiment`
  CorrectionConfig correction;
  CameraModel camera = CameraModel::top_down();
  TableBounds table;
  GripperModel gripper;
  ContactModel contact;

  double cube_edge = 0.05;  // meters
  CubeColor cube_color = CubeColor::red;
  PlanarPose start_pose{-0.10, 0.0, 0.0};
  PlanarPose target_pose{0.10, 0.0, 0.0};
  std::vector<DemoCube> demo_layout = default_demo_layout();

  /// Paper trial counts: 100 in simulation, 10 on the real robot.
  static int default_trials(NoiseMode mode) { return mode == NoiseMode::sim ? 100 : 10; }

  void validate() const;
};

struct TrialRecord {
  int trial_index = 0;
  std::uint64_t seed = 0;
  OffsetVec injected;
  double d_xy_after_place = 0.0;  // meters, ground truth
  double d_xy_after_push = 0.0;   // meters, ground truth
  int push_count = 0;
  TerminalStatus status = TerminalStatus::failed;

  bool completed() const { return status != TerminalStatus::failed; }
};

struct PhaseStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sample_std = 0.0;  // n-1 denominator; 0 when n == 1
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool single_sample = false;
};

/// Moments and linearly interpolated quartiles. Throws EmptyInput.
PhaseStats describe(std::span<const double> values);

struct ExperimentSummary {
  PhaseStats after_place;
  PhaseStats after_push;
  double mean_push_count = 0.0;
  std::size_t failed_trials = 0;
};

/// Statistics over completed trials; failed trials are only counted.
/// Throws EmptyInput when no trial completed.
ExperimentSummary summarize(std::span<const TrialRecord> records);

/// One trial; depends only on (cfg, trial_index).
TrialRecord run_trial(const ExperimentConfig& cfg, int trial_index);

struct ExperimentResult {
  std::vector<TrialRecord> records;  // sorted by trial_index
  ExperimentSummary summary;
};

/// Runs all trials on `jobs` threads (0 = hardware concurrency).
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs = 1);

/// `<stem>_summary.csv` next to `path`.
std::filesystem::path summary_path(const std::filesystem::path& path);

void export_csv(std::span<const TrialRecord> records, const ExperimentSummary& summary,
                const std::filesystem::path& path);
/// Reads the per-trial file written by export_csv (values at its 4-decimal precision).
std::vector<TrialRecord> parse_csv(const std::filesystem::path& path);

struct BoxEntry {
  std::string experiment;
  std::string group;  // e.g. the noise mode
  std::string phase;  // "after placing" / "after pushing"
  PhaseStats stats;   // meters
};

/// Box plot on a logarithmic millimeter axis: one `box-group` per entry with
/// IQR box, white median line, black mean dot and min/max whiskers.
void export_boxplot_svg(std::span<const BoxEntry> entries, const std::filesystem::path& path);
std::string boxplot_svg(std::span<const BoxEntry> entries);

struct TableRow {
  ExperimentKind experiment;
  NoiseMode mode;
  ExperimentSummary summary;
};

/// Rows are experiments, columns are after placing / after pushing per mode,
/// cells are "mean ± std" in millimeters with 2 decimals.
std::string format_summary_table(std::span<const TableRow> rows);

}  // namespace rplace
