#include "rplace/error.hpp"
#include "rplace/vision.hpp"

#include <cstdio>
#include <fstream>

namespace rplace {

PlanarPose estimate_object_world_pose(const RgbImage& image, const ColorRange& color, const CameraModel& camera,
                                      double edge, std::optional<PlanarPose> expected, VisionDebug* debug) {
  if (image.width() != camera.width || image.height() != camera.height) {
    throw Error(ErrorCode::InvalidArgument, "image size does not match the camera");
  }
  BinaryMask raw = hsv_threshold(image, color);
  BinaryMask clean = morph_cleanup(raw);
  const std::vector<Contour> contours = trace_contours(clean);

  const Contour* largest = nullptr;
  double largest_area = 0.0;
  double second_area = 0.0;
  for (const auto& c : contours) {
    if (c.hole) continue;
    const double a = contour_area(c);
    if (a > largest_area) {
      second_area = largest_area;
      largest_area = a;
      largest = &c;
    } else if (a > second_area) {
      second_area = a;
    }
  }
  if (largest == nullptr || largest_area < kMinBlobArea) {
    throw Error(ErrorCode::ObjectNotDetected, "no blob of the requested color");
  }
  if (second_area >= kAmbiguityRatio * largest_area) {
    throw Error(ErrorCode::AmbiguousDetection, "several blobs of the requested color");
  }

  const std::vector<Vec2> polygon = simplify(*largest, kSimplifyPerimeterFraction * contour_perimeter(*largest));
  const CornerSet coarse = extract_corners(polygon);
  const CornerSet corners = refine_corners(coarse, image);
  const RigidTransform3 initial = estimate_pose_dlt(corners, camera, edge);
  const RigidTransform3 camera_from_object = refine_pose_lm(initial, corners, camera, edge);

  // Position is read at the observed top-face center: a spurious tilt then
  // moves it far less than it moves the object origin one edge length below.
  const RigidTransform3 world_from_object = camera.extrinsic * camera_from_object;
  const Eigen::Vector3d face_center = world_from_object.apply(Eigen::Vector3d(0.0, 0.0, edge));
  const double yaw = world_from_object.to_planar().yaw;
  const double reference = expected ? expected->yaw : 0.0;
  const PlanarPose result(face_center.x(), face_center.y(), reference + wrap_symmetric(yaw - reference, kPi / 2.0));

  if (debug != nullptr) {
    debug->raw_mask = std::move(raw);
    debug->clean_mask = std::move(clean);
    debug->polygon = polygon;
    debug->coarse_corners = coarse;
    debug->corners = corners;
    debug->camera_from_object = camera_from_object;
  }
  return result;
}

void write_pbm(const BinaryMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  out << "P4\n" << mask.width() << ' ' << mask.height() << '\n';
  const int row_bytes = (mask.width() + 7) / 8;
  std::vector<char> row(static_cast<std::size_t>(row_bytes));
  for (int y = 0; y < mask.height(); ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) row[static_cast<std::size_t>(x / 8)] |= static_cast<char>(0x80 >> (x % 8));
    }
    out.write(row.data(), row_bytes);
  }
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

void write_corners(const CornerSet& corners, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  char line[64];
  for (const auto& c : corners.corners) {
    std::snprintf(line, sizeof line, "%.6f %.6f\n", c.x(), c.y());
    out << line;
  }
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

}  // namespace rplace
