#pragma once

#include "rplace/camera.hpp"
#include "rplace/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace rplace {

using Vec2 = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Color segmentation

struct Hsv {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

/// Hexcone conversion; gray pixels get hue 0.
Hsv rgb_to_hsv(Rgb pixel);

/// HSV box with hue wraparound: hue_min > hue_max selects [hue_min, 360) u [0, hue_max].
struct ColorRange {
  double hue_min = 0.0;
  double hue_max = 360.0;
  double sat_min = 0.0;
  double val_min = 0.0;

  bool contains(const Hsv& hsv) const;
  void validate() const;

  static ColorRange for_cube(CubeColor color);
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool value) { bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0; }
  std::size_t count() const;

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::vector<std::uint8_t>& bits() { return bits_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

BinaryMask hsv_threshold(const RgbImage& image, const ColorRange& range);

// ---------------------------------------------------------------------------
// Morphology (square structuring element; pixels outside the image are ignored)

constexpr int kMorphKernel = 7;

BinaryMask erode(const BinaryMask& mask, int kernel);
BinaryMask dilate(const BinaryMask& mask, int kernel);

/// Erosion then dilation, followed by dilation then erosion, with a 7x7 kernel.
BinaryMask morph_cleanup(const BinaryMask& mask);

// ---------------------------------------------------------------------------
// Contours

struct PixelCoord {
  int x = 0;
  int y = 0;

  bool operator==(const PixelCoord&) const = default;
  auto operator<=>(const PixelCoord&) const = default;
};

struct Contour {
  std::vector<PixelCoord> points;
  bool closed = true;
  bool hole = false;  // border between a component and one of its holes
};

/// Topological border following over 8-connected foreground / 4-connected
/// background. Returns outer and hole borders in raster discovery order.
std::vector<Contour> trace_contours(const BinaryMask& mask);

/// Closed-polygon length of a contour.
double contour_perimeter(const Contour& contour);
/// Absolute shoelace area enclosed by the contour's pixel centers.
double contour_area(const Contour& contour);

// ---------------------------------------------------------------------------
// Polygon processing

/// Recursive farthest-point (Douglas-Peucker) simplification. Points farther
/// than `epsilon` from the current chord are kept. Closed contours are split at
/// point 0 and the point farthest from it. Throws DegenerateContour below 3 points.
std::vector<Vec2> simplify(const Contour& contour, double epsilon);
std::vector<Vec2> simplify_polyline(std::span<const Vec2> points, double epsilon, bool closed);

/// Four image corners of a cube face, sorted: topmost (then leftmost) first,
/// the rest counter-clockwise as seen on screen.
struct CornerSet {
  std::array<Vec2, 4> corners;
};

CornerSet sort_corners(const std::array<Vec2, 4>& corners);

/// Picks the 4 vertices spanning the largest quadrilateral and sorts them.
/// Throws NotAQuadrilateral if they do not form a proper convex quad.
CornerSet extract_corners(std::span<const Vec2> polygon);

/// Moves each corner to the intersection of its two adjacent face edges,
/// located to subpixel accuracy from the anti-aliased color transition across
/// each edge. Returns the input unchanged if an edge cannot be measured.
CornerSet refine_corners(const CornerSet& coarse, const RgbImage& image);

// ---------------------------------------------------------------------------
// Pose estimation

/// Top-face corners of a cube in its own frame, matching the CornerSet order
/// for an upright cube seen from above.
std::array<Eigen::Vector3d, 4> top_face_model(double edge);

/// Planar DLT: homography from the top face to the image, decomposed with the
/// intrinsics into T(camera <- object).
RigidTransform3 estimate_pose_dlt(const CornerSet& corners, const CameraModel& camera, double edge);

using Residuals = Eigen::Matrix<double, 8, 1>;
using PoseJacobian = Eigen::Matrix<double, 8, 6>;
using PoseIncrement = Eigen::Matrix<double, 6, 1>;

/// Projected model corners minus observed corners (u0, v0, u1, v1, ...).
Residuals reprojection_residuals(const RigidTransform3& camera_from_object, const CornerSet& corners,
                                 const CameraModel& camera, double edge);
double reprojection_rms(const RigidTransform3& camera_from_object, const CornerSet& corners,
                        const CameraModel& camera, double edge);

/// Increment layout: (rotation vector applied on the left, translation).
RigidTransform3 apply_increment(const RigidTransform3& pose, const PoseIncrement& delta);
/// Analytic d(residuals)/d(increment) at zero increment.
PoseJacobian reprojection_jacobian(const RigidTransform3& camera_from_object, const CameraModel& camera, double edge);

struct LmReport {
  RigidTransform3 pose;
  double initial_rms = 0.0;
  double final_rms = 0.0;
  int iterations = 0;
  int accepted_steps = 0;
};

struct LmSettings {
  double initial_damping = 1e-3;
  double step_tolerance = 1e-10;
  double relative_cost_tolerance = 1e-12;
  int max_iterations = 100;
};

LmReport refine_pose_lm_report(const RigidTransform3& initial, const CornerSet& corners, const CameraModel& camera,
                               double edge, const LmSettings& settings = {});
RigidTransform3 refine_pose_lm(const RigidTransform3& initial, const CornerSet& corners, const CameraModel& camera,
                               double edge);

// ---------------------------------------------------------------------------
// Full chain

/// Intermediate products of one detection, for debugging.
struct VisionDebug {
  BinaryMask raw_mask;
  BinaryMask clean_mask;
  std::vector<Vec2> polygon;
  CornerSet coarse_corners;
  CornerSet corners;
  RigidTransform3 camera_from_object;
};

constexpr double kMinBlobArea = 100.0;        // pixels
constexpr double kAmbiguityRatio = 0.5;       // second blob / largest blob
constexpr double kSimplifyPerimeterFraction = 0.02;

/// Segments the cube of the given color and returns its table pose
/// T(W<-O) = T(W<-C) * T(C<-O). Yaw is reported as the representative of the
/// cube's 90-degree symmetry nearest to `expected` (or to 0).
PlanarPose estimate_object_world_pose(const RgbImage& image, const ColorRange& color, const CameraModel& camera,
                                      double edge, std::optional<PlanarPose> expected = std::nullopt,
                                      VisionDebug* debug = nullptr);

/// Binary PBM (P4), set bits are foreground.
void write_pbm(const BinaryMask& mask, const std::filesystem::path& path);
/// One "u v" line per corner, 6 decimals.
void write_corners(const CornerSet& corners, const std::filesystem::path& path);

}  // namespace rplace
