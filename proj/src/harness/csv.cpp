#include "rplace/error.hpp"
#include "rplace/harness.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rplace {

namespace {

constexpr std::string_view kHeader = "trial,seed,inj_dx_mm,inj_dy_mm,inj_dyaw_deg,dxy_place_mm,dxy_push_mm,pushes,status";

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  // "-0.0000" and "0.0000" mean the same value; keep one spelling.
  if (std::string_view(buf) == "-0.0000") return "0.0000";
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& text, int line) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::IoFailure, "line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return value;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing '" + path.string() + "'");
}

}  // namespace

std::filesystem::path summary_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + "_summary" + path.extension().string());
  return out;
}

void export_csv(std::span<const TrialRecord> records, const ExperimentSummary& summary,
                const std::filesystem::path& path) {
  std::string body(kHeader);
  body += '\n';
  for (const auto& r : records) {
    body += std::to_string(r.trial_index) + ',' + std::to_string(r.seed) + ',' + fixed4(r.injected.dx * 1000.0) +
            ',' + fixed4(r.injected.dy * 1000.0) + ',' + fixed4(rad_to_deg(r.injected.dyaw)) + ',' +
            fixed4(r.d_xy_after_place * 1000.0) + ',' + fixed4(r.d_xy_after_push * 1000.0) + ',' +
            std::to_string(r.push_count) + ',' + std::string(to_string(r.status)) + '\n';
  }
  write_file(path, body);

  std::string s = "metric,value\n";
  auto phase = [&](std::string_view name, const PhaseStats& p) {
    const std::string prefix(name);
    s += prefix + "_n," + std::to_string(p.n) + '\n';
    s += prefix + "_mean_mm," + fixed4(p.mean * 1000.0) + '\n';
    s += prefix + "_std_mm," + fixed4(p.sample_std * 1000.0) + '\n';
    s += prefix + "_median_mm," + fixed4(p.median * 1000.0) + '\n';
    s += prefix + "_q1_mm," + fixed4(p.q1 * 1000.0) + '\n';
    s += prefix + "_q3_mm," + fixed4(p.q3 * 1000.0) + '\n';
    s += prefix + "_min_mm," + fixed4(p.min * 1000.0) + '\n';
    s += prefix + "_max_mm," + fixed4(p.max * 1000.0) + '\n';
  };
  phase("after_place", summary.after_place);
  phase("after_push", summary.after_push);
  s += "mean_push_count," + fixed4(summary.mean_push_count) + '\n';
  s += "failed_trials," + std::to_string(summary.failed_trials) + '\n';
  write_file(summary_path(path), s);
}

std::vector<TrialRecord> parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw Error(ErrorCode::IoFailure, "'" + path.string() + "' does not start with the trial header");
  }
  std::vector<TrialRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) throw Error(ErrorCode::IoFailure, "line " + std::to_string(line_no) + ": expected 9 fields");
    TrialRecord r;
    r.trial_index = parse_number<int>(f[0], line_no);
    r.seed = parse_number<std::uint64_t>(f[1], line_no);
    r.injected = OffsetVec::from_components(parse_number<double>(f[2], line_no) / 1000.0,
                                            parse_number<double>(f[3], line_no) / 1000.0,
                                            deg_to_rad(parse_number<double>(f[4], line_no)));
    r.d_xy_after_place = parse_number<double>(f[5], line_no) / 1000.0;
    r.d_xy_after_push = parse_number<double>(f[6], line_no) / 1000.0;
    r.push_count = parse_number<int>(f[7], line_no);
    const auto status = parse_terminal_status(f[8]);
    if (!status) throw Error(ErrorCode::IoFailure, "line " + std::to_string(line_no) + ": unknown status");
    r.status = *status;
    records.push_back(r);
  }
  return records;
}

}  // namespace rplace
