#include "rplace/config.hpp"

#include "rplace/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>

namespace rplace {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) const {
    std::string where(source_);
    if (!mark.is_null()) where += ":" + std::to_string(mark.line + 1);
    throw Error(ErrorCode::ConfigError, where + ": " + message);
  }
  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const { fail(node.Mark(), message); }

  void require_map(const YAML::Node& node, std::string_view what) const {
    if (!node.IsMap()) fail(node, std::string(what) + " must be a mapping");
  }

  void check_keys(const YAML::Node& node, std::string_view what, std::initializer_list<std::string_view> allowed) const {
    require_map(node, what);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(kv.first, "unknown key '" + key + "' in " + std::string(what));
      }
    }
  }

  template <typename T>
  T scalar(const YAML::Node& node, std::string_view key) const {
    if (!node.IsScalar()) fail(node, "'" + std::string(key) + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(node, "'" + std::string(key) + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  template <typename T>
  void read(const YAML::Node& map, std::string_view key, T& out) const {
    if (const YAML::Node n = map[std::string(key)]) out = scalar<T>(n, key);
  }

  void read_deg(const YAML::Node& map, std::string_view key, double& radians) const {
    if (const YAML::Node n = map[std::string(key)]) radians = deg_to_rad(scalar<double>(n, key));
  }

  PlanarPose pose(const YAML::Node& node, std::string_view what) const {
    check_keys(node, what, {"x", "y", "yaw_deg"});
    double x = 0.0, y = 0.0, yaw = 0.0;
    read(node, "x", x);
    read(node, "y", y);
    read_deg(node, "yaw_deg", yaw);
    return {x, y, yaw};
  }

  template <typename Enum, typename Parse>
  Enum enumeration(const YAML::Node& node, std::string_view key, Parse parse) const {
    const auto text = scalar<std::string>(node, key);
    const auto value = parse(text);
    if (!value) fail(node, "'" + std::string(key) + "' has an unknown value '" + text + "'");
    return *value;
  }

  // Runs a validate() call and re-raises its failure at `node`.
  template <typename F>
  void validated(const YAML::Node& node, std::string_view what, F&& check) const {
    try {
      check();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      fail(node, std::string(what) + ": " + e.what());
    }
  }

 private:
  std::string source_;
};

YAML::Node parse_yaml(std::string_view text, const Reader& reader) {
  try {
    YAML::Node root = YAML::Load(std::string(text));
    if (!root || root.IsNull()) return YAML::Node(YAML::NodeType::Map);
    return root;
  } catch (const YAML::ParserException& e) {
    reader.fail(e.mark, e.msg);
  }
}

void apply_overrides(YAML::Node& root, std::span<const std::string> overrides, const Reader& reader) {
  for (const auto& text : overrides) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
      reader.fail(YAML::Mark::null_mark(), "override '" + text + "' is not key=value");
    }
    const std::string key = text.substr(0, eq);
    const std::string value = text.substr(eq + 1);
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
      if (part.empty()) reader.fail(YAML::Mark::null_mark(), "override key '" + key + "' has an empty component");
      parts.push_back(part);
    }
    if (!root.IsMap()) reader.fail(root, "document must be a mapping");
    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      YAML::Node child = cur[parts[i]];
      if (!child) {
        cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
        child = cur[parts[i]];
      } else if (!child.IsMap()) {
        reader.fail(YAML::Mark::null_mark(), "override '" + key + "': '" + parts[i] + "' is not a section");
      }
      cur.reset(child);
    }
    YAML::Node parsed;
    try {
      parsed = YAML::Load(value);
    } catch (const YAML::ParserException& e) {
      reader.fail(YAML::Mark::null_mark(), "override '" + key + "': " + e.msg);
    }
    cur[parts.back()] = parsed.IsNull() ? YAML::Node(value) : parsed;
  }
}

void read_noise(const Reader& r, const YAML::Node& node, std::string_view what, NoiseProfile& noise) {
  r.check_keys(node, what,
               {"grasp_lateral_sigma", "release_sigma", "release_yaw_sigma_deg", "push_distance_rel_sigma",
                "push_lateral_sigma", "pixel_noise_sigma"});
  r.read(node, "grasp_lateral_sigma", noise.grasp_lateral_sigma);
  r.read(node, "release_sigma", noise.release_sigma);
  r.read_deg(node, "release_yaw_sigma_deg", noise.release_yaw_sigma);
  r.read(node, "push_distance_rel_sigma", noise.push_distance_rel_sigma);
  r.read(node, "push_lateral_sigma", noise.push_lateral_sigma);
  r.read(node, "pixel_noise_sigma", noise.pixel_noise_sigma);
  r.validated(node, what, [&] { noise.validate(); });
}

void read_correction(const Reader& r, const YAML::Node& node, CorrectionConfig& c) {
  r.check_keys(node, "correction", {"threshold", "max_pushes", "defer_correction"});
  r.read(node, "threshold", c.threshold);
  r.read(node, "max_pushes", c.max_pushes);
  r.read(node, "defer_correction", c.defer_correction);
  r.validated(node, "correction", [&] { c.validate(); });
}

void read_camera(const Reader& r, const YAML::Node& node, CameraModel& camera) {
  r.check_keys(node, "camera", {"fx", "fy", "cx", "cy", "width", "height", "height_above_table"});
  if (const YAML::Node h = node["height_above_table"]) {
    const CameraModel placed = CameraModel::top_down(r.scalar<double>(h, "height_above_table"));
    camera.extrinsic = placed.extrinsic;
  }
  r.read(node, "fx", camera.fx);
  r.read(node, "fy", camera.fy);
  r.read(node, "cx", camera.cx);
  r.read(node, "cy", camera.cy);
  r.read(node, "width", camera.width);
  r.read(node, "height", camera.height);
  r.validated(node, "camera", [&] { camera.validate(); });
}

void read_table(const Reader& r, const YAML::Node& node, TableBounds& table) {
  r.check_keys(node, "table", {"x_min", "x_max", "y_min", "y_max"});
  r.read(node, "x_min", table.x_min);
  r.read(node, "x_max", table.x_max);
  r.read(node, "y_min", table.y_min);
  r.read(node, "y_max", table.y_max);
  if (!(table.x_min < table.x_max && table.y_min < table.y_max)) r.fail(node, "table bounds are empty");
}

void read_gripper(const Reader& r, const YAML::Node& node, GripperModel& g) {
  r.check_keys(node, "gripper", {"max_opening", "finger_thickness", "fingertip_width"});
  r.read(node, "max_opening", g.max_opening);
  r.read(node, "finger_thickness", g.finger_thickness);
  r.read(node, "fingertip_width", g.fingertip_width);
  r.validated(node, "gripper", [&] { g.validate(); });
}

void read_contact(const Reader& r, const YAML::Node& node, ContactModel& c) {
  r.check_keys(node, "contact", {"yaw_pull_factor", "yaw_pull_clamp_deg", "rotation_drag_lever", "max_push_distance"});
  r.read(node, "yaw_pull_factor", c.yaw_pull_factor);
  r.read_deg(node, "yaw_pull_clamp_deg", c.yaw_pull_clamp);
  r.read(node, "rotation_drag_lever", c.rotation_drag_lever);
  r.read(node, "max_push_distance", c.max_push_distance);
  if (!(c.yaw_pull_factor >= 0.0 && c.yaw_pull_factor <= 1.0)) r.fail(node, "yaw_pull_factor must be in [0, 1]");
  if (!(c.yaw_pull_clamp >= 0.0)) r.fail(node, "yaw_pull_clamp_deg must be >= 0");
  if (!(c.rotation_drag_lever >= 0.0)) r.fail(node, "rotation_drag_lever must be >= 0");
  if (!(c.max_push_distance > 0.0)) r.fail(node, "max_push_distance must be positive");
}

void read_pick_error(const Reader& r, const YAML::Node& node, ErrorSpec& spec, bool with_kind) {
  if (with_kind) {
    r.check_keys(node, "pick_error", {"kind", "max_shift", "max_rot_deg"});
    if (const YAML::Node k = node["kind"]) spec.kind = r.enumeration<InjectionKind>(k, "kind", parse_injection_kind);
  } else {
    r.check_keys(node, "pick_error", {"max_shift", "max_rot_deg"});
  }
  r.read(node, "max_shift", spec.max_shift);
  r.read_deg(node, "max_rot_deg", spec.max_rot);
}

std::vector<DemoCube> read_cubes(const Reader& r, const YAML::Node& node) {
  if (!node.IsSequence()) r.fail(node, "'cubes' must be a list");
  std::vector<DemoCube> cubes;
  for (const auto& item : node) {
    r.check_keys(item, "cube entry", {"id", "color", "start", "target"});
    DemoCube c;
    if (!item["id"]) r.fail(item, "cube entry needs an 'id'");
    c.id = r.scalar<std::string>(item["id"], "id");
    if (!item["color"]) r.fail(item, "cube entry needs a 'color'");
    c.color = r.enumeration<CubeColor>(item["color"], "color", parse_cube_color);
    if (!item["start"]) r.fail(item, "cube entry needs a 'start' pose");
    if (!item["target"]) r.fail(item, "cube entry needs a 'target' pose");
    c.start = r.pose(item["start"], "start");
    c.target = r.pose(item["target"], "target");
    for (const auto& other : cubes) {
      if (other.id == c.id) r.fail(item, "duplicate cube id '" + c.id + "'");
      if (other.color == c.color) r.fail(item, "cubes '" + other.id + "' and '" + c.id + "' share a color");
    }
    cubes.push_back(std::move(c));
  }
  if (cubes.empty()) r.fail(node, "'cubes' must not be empty");
  return cubes;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunPlan parse_run_plan(std::string_view text, std::span<const std::string> overrides, std::string_view source) {
  const Reader r(source);
  YAML::Node root = parse_yaml(text, r);
  apply_overrides(root, overrides, r);
  r.check_keys(root, "config",
               {"experiment", "mode", "trials", "base_seed", "output_dir", "noise", "pick_error", "correction",
                "camera", "table", "gripper", "contact", "cube", "start_pose", "target_pose", "demo"});

  ExperimentConfig base;
  std::vector<ExperimentKind> experiments = {ExperimentKind::nominal};
  bool all_experiments = false;
  if (const YAML::Node n = root["experiment"]) {
    const auto name = r.scalar<std::string>(n, "experiment");
    if (name == "all") {
      all_experiments = true;
      experiments.assign(kTableExperiments.begin(), kTableExperiments.end());
    } else {
      experiments = {r.enumeration<ExperimentKind>(n, "experiment", parse_experiment_kind)};
    }
  }
  std::vector<NoiseMode> modes = {NoiseMode::sim};
  if (const YAML::Node n = root["mode"]) {
    const auto name = r.scalar<std::string>(n, "mode");
    if (name == "both") {
      modes = {NoiseMode::sim, NoiseMode::real};
    } else {
      modes = {r.enumeration<NoiseMode>(n, "mode", parse_noise_mode)};
    }
  }
  std::optional<int> trials;
  if (const YAML::Node n = root["trials"]) {
    trials = r.scalar<int>(n, "trials");
    if (*trials < 1) r.fail(n, "trials must be >= 1");
  }
  r.read(root, "base_seed", base.base_seed);
  if (const YAML::Node n = root["output_dir"]) base.output_dir = r.scalar<std::string>(n, "output_dir");

  NoiseProfile sim_noise = NoiseProfile::preset(NoiseMode::sim);
  NoiseProfile real_noise = NoiseProfile::preset(NoiseMode::real);
  if (const YAML::Node n = root["noise"]) {
    r.check_keys(n, "noise", {"sim", "real"});
    if (n["sim"]) read_noise(r, n["sim"], "noise.sim", sim_noise);
    if (n["real"]) read_noise(r, n["real"], "noise.real", real_noise);
  }
  if (const YAML::Node n = root["pick_error"]) read_pick_error(r, n, base.pick_error, false);
  if (const YAML::Node n = root["correction"]) read_correction(r, n, base.correction);
  if (const YAML::Node n = root["camera"]) read_camera(r, n, base.camera);
  if (const YAML::Node n = root["table"]) read_table(r, n, base.table);
  if (const YAML::Node n = root["gripper"]) read_gripper(r, n, base.gripper);
  if (const YAML::Node n = root["contact"]) read_contact(r, n, base.contact);
  if (const YAML::Node n = root["cube"]) {
    r.check_keys(n, "cube", {"edge", "color"});
    r.read(n, "edge", base.cube_edge);
    if (n["color"]) base.cube_color = r.enumeration<CubeColor>(n["color"], "color", parse_cube_color);
  }
  if (const YAML::Node n = root["start_pose"]) base.start_pose = r.pose(n, "start_pose");
  if (const YAML::Node n = root["target_pose"]) base.target_pose = r.pose(n, "target_pose");

  NoiseMode demo_mode = NoiseMode::sim;
  std::optional<int> demo_trials;
  if (const YAML::Node n = root["demo"]) {
    r.check_keys(n, "demo", {"mode", "trials", "cubes"});
    if (n["mode"]) demo_mode = r.enumeration<NoiseMode>(n["mode"], "mode", parse_noise_mode);
    if (const YAML::Node t = n["trials"]) {
      demo_trials = r.scalar<int>(t, "trials");
      if (*demo_trials < 1) r.fail(t, "trials must be >= 1");
    }
    if (n["cubes"]) base.demo_layout = read_cubes(r, n["cubes"]);
  }

  RunPlan plan;
  auto add = [&](ExperimentKind e, NoiseMode m, std::optional<int> count) {
    ExperimentConfig cfg = base;
    cfg.experiment = e;
    cfg.mode = m;
    cfg.noise = m == NoiseMode::sim ? sim_noise : real_noise;
    cfg.trials = count.value_or(ExperimentConfig::default_trials(m));
    r.validated(root, "config", [&] { cfg.validate(); });
    plan.runs.push_back(std::move(cfg));
  };
  for (NoiseMode m : modes) {
    for (ExperimentKind e : experiments) add(e, m, e == ExperimentKind::arrangement_demo && demo_trials ? demo_trials : trials);
  }
  if (all_experiments) add(ExperimentKind::arrangement_demo, demo_mode, demo_trials ? demo_trials : trials);
  return plan;
}

RunPlan load_run_plan(const std::filesystem::path& path, std::span<const std::string> overrides) {
  return parse_run_plan(read_text_file(path), overrides, path.string());
}

void Scenario::validate() const {
  noise.validate();
  correction.validate();
  camera.validate();
  gripper.validate();
  if (cubes.empty()) throw Error(ErrorCode::InvalidArgument, "scenario has no cubes");
  pick_error.validate(cube_edge);
}

Scenario parse_scenario(std::string_view text, std::span<const std::string> overrides, std::string_view source) {
  const Reader r(source);
  YAML::Node root = parse_yaml(text, r);
  apply_overrides(root, overrides, r);
  r.check_keys(root, "scenario",
               {"mode", "seed", "noise", "pick_error", "correction", "camera", "table", "gripper", "contact",
                "cube_edge", "cubes"});
  Scenario s;
  if (const YAML::Node n = root["mode"]) s.mode = r.enumeration<NoiseMode>(n, "mode", parse_noise_mode);
  s.noise = NoiseProfile::preset(s.mode);
  r.read(root, "seed", s.seed);
  if (const YAML::Node n = root["noise"]) read_noise(r, n, "noise", s.noise);
  if (const YAML::Node n = root["pick_error"]) read_pick_error(r, n, s.pick_error, true);
  if (const YAML::Node n = root["correction"]) read_correction(r, n, s.correction);
  if (const YAML::Node n = root["camera"]) read_camera(r, n, s.camera);
  if (const YAML::Node n = root["table"]) read_table(r, n, s.table);
  if (const YAML::Node n = root["gripper"]) read_gripper(r, n, s.gripper);
  if (const YAML::Node n = root["contact"]) read_contact(r, n, s.contact);
  r.read(root, "cube_edge", s.cube_edge);
  if (!root["cubes"]) r.fail(root, "scenario needs a 'cubes' list");
  s.cubes = read_cubes(r, root["cubes"]);
  r.validated(root, "scenario", [&] { s.validate(); });
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, std::span<const std::string> overrides) {
  return parse_scenario(read_text_file(path), overrides, path.string());
}

bool is_scenario_document(std::string_view text) {
  try {
    const YAML::Node root = YAML::Load(std::string(text));
    return root.IsMap() && root["cubes"];
  } catch (const YAML::Exception&) {
    return false;
  }
}

}  // namespace rplace
