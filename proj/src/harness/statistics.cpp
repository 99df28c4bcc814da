#include "rplace/error.hpp"
#include "rplace/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace rplace {

namespace {

// Linear interpolation between order statistics at rank p * (n - 1).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double rank = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

PhaseStats describe(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values to summarize");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  PhaseStats s;
  s.n = sorted.size();
  // Two-pass moments.
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.sample_std = std::sqrt(ss / static_cast<double>(s.n - 1));
  } else {
    s.single_sample = true;
  }
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  return s;
}

ExperimentSummary summarize(std::span<const TrialRecord> records) {
  std::vector<double> place;
  std::vector<double> push;
  double pushes = 0.0;
  ExperimentSummary summary;
  for (const auto& r : records) {
    if (!r.completed()) {
      ++summary.failed_trials;
      continue;
    }
    place.push_back(r.d_xy_after_place);
    push.push_back(r.d_xy_after_push);
    pushes += r.push_count;
  }
  if (place.empty()) throw Error(ErrorCode::EmptyInput, "no completed trials to summarize");
  summary.after_place = describe(place);
  summary.after_push = describe(push);
  summary.mean_push_count = pushes / static_cast<double>(place.size());
  return summary;
}

std::string format_summary_table(std::span<const TableRow> rows) {
  std::vector<ExperimentKind> experiments;
  std::vector<NoiseMode> modes;
  for (const auto& r : rows) {
    if (std::find(experiments.begin(), experiments.end(), r.experiment) == experiments.end()) {
      experiments.push_back(r.experiment);
    }
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
  }
  std::sort(modes.begin(), modes.end());

  auto cell = [](const PhaseStats& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f \u00b1 %.2f", p.mean * 1000.0, p.sample_std * 1000.0);
    return std::string(buf);
  };
  // Width in terminal columns; the plus-minus sign is two bytes but one column.
  auto pad = [](const std::string& text, std::size_t width) {
    std::size_t cols = 0;
    for (unsigned char c : text) cols += (c & 0xC0) != 0x80;
    return text + std::string(width > cols ? width - cols : 0, ' ');
  };

  constexpr std::size_t kFirst = 18;
  constexpr std::size_t kCell = 22;
  std::string out = pad("Experiment [mm]", kFirst);
  for (NoiseMode m : modes) {
    out += " | " + pad(std::string(to_string(m)) + ": after placing", kCell);
    out += " | " + pad(std::string(to_string(m)) + ": after pushing", kCell);
  }
  out += '\n';
  out += std::string(kFirst, '-');
  for (std::size_t i = 0; i < modes.size() * 2; ++i) out += "-+-" + std::string(kCell, '-');
  out += '\n';
  for (ExperimentKind e : experiments) {
    out += pad(std::string(to_string(e)), kFirst);
    for (NoiseMode m : modes) {
      const TableRow* row = nullptr;
      for (const auto& r : rows) {
        if (r.experiment == e && r.mode == m) row = &r;
      }
      if (row == nullptr || row->summary.after_place.n == 0) {
        out += " | " + pad("-", kCell) + " | " + pad("-", kCell);
      } else {
        out += " | " + pad(cell(row->summary.after_place), kCell);
        out += " | " + pad(cell(row->summary.after_push), kCell);
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace rplace
