#pragma once

#include "rplace/geometry.hpp"
#include "rplace/world.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace rplace {

/// Pinhole camera. Pixel (u, v) = (column, row) has its center at integer
/// coordinates; the extrinsic is T(world <- camera), camera z along the optical axis.
struct CameraModel {
  double fx = 900.0;
  double fy = 900.0;
  double cx = 640.0;
  double cy = 360.0;
  int width = 1280;
  int height = 720;
  RigidTransform3 extrinsic;

  /// Optical axis pointing straight down, optical center `height_above_table`
  /// above the table origin; image u grows with world x, v with world -y.
  static CameraModel top_down(double height_above_table = 0.70);

  void validate() const;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

/// Projects a point given in the camera frame. Throws BehindCamera for z <= 0.
PixelPoint project_camera_point(const CameraModel& camera, const Eigen::Vector3d& point_camera);
/// Projects a world point through the extrinsic.
PixelPoint project(const CameraModel& camera, const Eigen::Vector3d& point_world);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

Rgb cube_rgb(CubeColor color);
Rgb table_rgb();

/// Row-major 8-bit RGB raster.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb at(int x, int y) const {
    const std::size_t i = index(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = index(x, y);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }

  const std::vector<std::uint8_t>& bytes() const { return data_; }
  std::vector<std::uint8_t>& bytes() { return data_; }

  bool operator==(const RgbImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Gray levels of sensor noise per unit of NoiseProfile::pixel_noise_sigma.
constexpr double kGrayLevelsPerNoiseUnit = 16.0;

/// Top-face corners of a cube projected to the image, in the cube's local
/// counter-clockwise order.
std::array<PixelPoint, 4> project_top_face(const CameraModel& camera, const CubeObject& cube);

/// Renders the table and the top faces of all cubes on it, with exact
/// area-weighted edge coverage, then adds per-channel Gaussian noise
/// (one seed drawn from the world's stream; nothing is drawn when the noise is zero).
RgbImage render(WorldState& world, const CameraModel& camera);

/// Fraction of pixel (x, y) covered by the convex quadrilateral `quad`.
double pixel_coverage(const std::array<PixelPoint, 4>& quad, int x, int y);

void write_ppm(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);

}  // namespace rplace
