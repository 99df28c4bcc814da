#include "rplace/camera.hpp"

#include "rplace/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace rplace {

CameraModel CameraModel::top_down(double height_above_table) {
  CameraModel cam;
  Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
  r(0, 0) = 1.0;
  r(1, 1) = -1.0;
  r(2, 2) = -1.0;
  cam.extrinsic = RigidTransform3(r, Eigen::Vector3d(0.0, 0.0, height_above_table));
  return cam;
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::InvalidArgument, "principal point must lie inside the image");
  }
}

PixelPoint project_camera_point(const CameraModel& camera, const Eigen::Vector3d& p) {
  if (!(p.z() > 0.0)) throw Error(ErrorCode::BehindCamera, "point is not in front of the camera");
  return {camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy};
}

PixelPoint project(const CameraModel& camera, const Eigen::Vector3d& point_world) {
  return project_camera_point(camera, invert(camera.extrinsic).apply(point_world));
}

Rgb cube_rgb(CubeColor color) {
  switch (color) {
    case CubeColor::red: return {200, 30, 30};
    case CubeColor::green: return {30, 170, 50};
    case CubeColor::blue: return {30, 60, 200};
    case CubeColor::yellow: return {220, 200, 30};
  }
  return {200, 30, 30};
}

Rgb table_rgb() { return {110, 110, 110}; }

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error(ErrorCode::InvalidArgument, "negative image size");
  data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

std::array<PixelPoint, 4> project_top_face(const CameraModel& camera, const CubeObject& cube) {
  const RigidTransform3 camera_from_object =
      compose(invert(camera.extrinsic), RigidTransform3::from_planar(cube.pose));
  const double h = cube.edge / 2.0;
  const std::array<Eigen::Vector3d, 4> local = {
      Eigen::Vector3d(-h, -h, cube.height()), Eigen::Vector3d(h, -h, cube.height()),
      Eigen::Vector3d(h, h, cube.height()), Eigen::Vector3d(-h, h, cube.height())};
  std::array<PixelPoint, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = project_camera_point(camera, camera_from_object.apply(local[i]));
  return out;
}

namespace {

struct HalfPlane {
  double a, b, c;  // a*u + b*v + c >= 0 inside, (a, b) unit length

  double eval(double u, double v) const { return a * u + b * v + c; }
};

std::array<HalfPlane, 4> half_planes(const std::array<PixelPoint, 4>& q) {
  double area2 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = q[i];
    const auto& n = q[(i + 1) % 4];
    area2 += p.u * n.v - n.u * p.v;
  }
  const double orient = area2 >= 0.0 ? 1.0 : -1.0;
  std::array<HalfPlane, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = q[i];
    const auto& n = q[(i + 1) % 4];
    const double eu = n.u - p.u;
    const double ev = n.v - p.v;
    const double len = std::hypot(eu, ev);
    // orient * cross(e, x - p) >= 0
    const double a = -orient * ev / len;
    const double b = orient * eu / len;
    out[i] = {a, b, -(a * p.u + b * p.v)};
  }
  return out;
}

double clipped_area(const std::array<HalfPlane, 4>& planes, int x, int y) {
  std::vector<PixelPoint> poly = {{x - 0.5, y - 0.5}, {x + 0.5, y - 0.5}, {x + 0.5, y + 0.5}, {x - 0.5, y + 0.5}};
  std::vector<PixelPoint> next;
  for (const auto& hp : planes) {
    next.clear();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const PixelPoint& cur = poly[i];
      const PixelPoint& nxt = poly[(i + 1) % n];
      const double fc = hp.eval(cur.u, cur.v);
      const double fn = hp.eval(nxt.u, nxt.v);
      if (fc >= 0.0) next.push_back(cur);
      if ((fc >= 0.0) != (fn >= 0.0)) {
        const double t = fc / (fc - fn);
        next.push_back({cur.u + t * (nxt.u - cur.u), cur.v + t * (nxt.v - cur.v)});
      }
    }
    poly.swap(next);
    if (poly.empty()) return 0.0;
  }
  double area2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& n = poly[(i + 1) % poly.size()];
    area2 += p.u * n.v - n.u * p.v;
  }
  return std::abs(area2) / 2.0;
}

double coverage_with(const std::array<HalfPlane, 4>& planes, int x, int y) {
  constexpr double kHalfDiagonal = 0.70710678118654757;
  double min_d = std::numeric_limits<double>::infinity();
  for (const auto& hp : planes) {
    const double d = hp.eval(x, y);
    if (d <= -kHalfDiagonal) return 0.0;
    min_d = std::min(min_d, d);
  }
  if (min_d >= kHalfDiagonal) return 1.0;
  return std::clamp(clipped_area(planes, x, y), 0.0, 1.0);
}

// Counter-based noise stream: word k is a function of (seed, k) alone, so any
// channel value's draw can be recomputed without replaying the stream.
std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + (k + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 16-bit table index of channel value i.
std::size_t noise_index(std::uint64_t seed, std::size_t i) {
  return (splitmix64(seed, i / 4) >> (16 * (i % 4))) & 0xFFFFu;
}

const std::array<float, 65536>& gaussian_table() {
  static const std::array<float, 65536> table = [] {
    std::array<float, 65536> t{};
    const boost::math::normal standard;
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = static_cast<float>(boost::math::quantile(standard, (static_cast<double>(i) + 0.5) / 65536.0));
    }
    return t;
  }();
  return table;
}

}  // namespace

double pixel_coverage(const std::array<PixelPoint, 4>& quad, int x, int y) {
  return coverage_with(half_planes(quad), x, y);
}

RgbImage render(WorldState& world, const CameraModel& camera) {
  camera.validate();
  const int w = camera.width;
  const int h = camera.height;
  RgbImage image(w, h, table_rgb());
  auto& out = image.bytes();

  // Pixels only partly covered by a face keep their exact blended value.
  struct Partial {
    std::size_t index;  // byte offset of the red channel
    std::array<float, 3> value;
  };
  std::vector<Partial> partials;
  std::vector<std::uint8_t> is_partial(static_cast<std::size_t>(w) * h, 0);

  for (const CubeObject* cube : world.cubes_on_table()) {
    const auto quad = project_top_face(camera, *cube);
    const auto planes = half_planes(quad);
    double umin = quad[0].u, umax = quad[0].u, vmin = quad[0].v, vmax = quad[0].v;
    for (const auto& p : quad) {
      umin = std::min(umin, p.u);
      umax = std::max(umax, p.u);
      vmin = std::min(vmin, p.v);
      vmax = std::max(vmax, p.v);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(umin + 0.5)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(umax - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(vmin + 0.5)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(vmax - 0.5)));
    const Rgb color = cube_rgb(cube->color);
    const std::array<float, 3> target = {static_cast<float>(color.r), static_cast<float>(color.g),
                                         static_cast<float>(color.b)};
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double c = coverage_with(planes, x, y);
        if (c <= 0.0) continue;
        const std::size_t pixel = static_cast<std::size_t>(y) * w + x;
        // Footprints never overlap, so a pixel is shared only along touching edges.
        Partial* existing = nullptr;
        if (is_partial[pixel]) {
          for (auto& p : partials) {
            if (p.index == pixel * 3) existing = &p;
          }
        }
        if (c >= 1.0) {
          image.set(x, y, color);
          if (existing != nullptr) existing->value = target;
          continue;
        }
        std::array<float, 3> base;
        if (existing != nullptr) {
          base = existing->value;
        } else {
          const Rgb b = image.at(x, y);
          base = {static_cast<float>(b.r), static_cast<float>(b.g), static_cast<float>(b.b)};
        }
        std::array<float, 3> blended;
        for (std::size_t k = 0; k < 3; ++k) blended[k] = base[k] + static_cast<float>(c) * (target[k] - base[k]);
        if (existing != nullptr) {
          existing->value = blended;
        } else {
          partials.push_back({pixel * 3, blended});
          is_partial[pixel] = 1;
        }
      }
    }
  }

  auto quantize = [](float v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5f), 0.0f, 255.0f)); };
  const double sigma = world.noise().pixel_noise_sigma * kGrayLevelsPerNoiseUnit;
  if (sigma == 0.0) {
    for (const auto& p : partials) {
      for (std::size_t k = 0; k < 3; ++k) out[p.index + k] = quantize(p.value[k]);
    }
    return image;
  }

  // Noise for channel value i comes from 16 bits of the stream; integer-valued
  // pixels add the pre-rounded offset, partial pixels round after adding.
  const auto& table_z = gaussian_table();
  const float s = static_cast<float>(sigma);
  std::vector<std::int16_t> offsets(table_z.size());
  for (std::size_t k = 0; k < table_z.size(); ++k) {
    offsets[k] = static_cast<std::int16_t>(std::clamp(std::floor(s * table_z[k] + 0.5f), -512.0f, 512.0f));
  }
  const std::uint64_t seed = world.rng()();
  const std::size_t n = out.size();
  const std::size_t words = n / 4;
  for (std::size_t k = 0; k < words; ++k) {
    std::uint64_t bits = splitmix64(seed, k);
    std::uint8_t* p = &out[4 * k];
    for (int j = 0; j < 4; ++j, bits >>= 16) p[j] = static_cast<std::uint8_t>(std::clamp(p[j] + offsets[bits & 0xFFFFu], 0, 255));
  }
  for (std::size_t i = 4 * words; i < n; ++i) {
    out[i] = static_cast<std::uint8_t>(std::clamp(out[i] + offsets[noise_index(seed, i)], 0, 255));
  }
  for (const auto& p : partials) {
    for (std::size_t k = 0; k < 3; ++k) out[p.index + k] = quantize(p.value[k] + s * table_z[noise_index(seed, p.index + k)]);
  }
  return image;
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.bytes().data()), static_cast<std::streamsize>(image.bytes().size()));
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing '" + path.string() + "'");
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255 || w <= 0 || h <= 0) {
    throw Error(ErrorCode::IoFailure, "'" + path.string() + "' is not an 8-bit P6 image");
  }
  in.get();
  RgbImage image(w, h);
  in.read(reinterpret_cast<char*>(image.bytes().data()), static_cast<std::streamsize>(image.bytes().size()));
  if (!in) throw Error(ErrorCode::IoFailure, "truncated image '" + path.string() + "'");
  return image;
}

}  // namespace rplace
