#include "oracles/oracles.hpp"
#include "rplace/error.hpp"
#include "rplace/vision.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace rplace;

namespace {

BinaryMask random_mask(std::mt19937_64& rng, int w, int h) {
  BinaryMask m(w, h);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = 0.2 + 0.6 * u(rng);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, u(rng) < density);
  }
  // A few solid rectangles give the morphology something to preserve.
  std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
  for (int k = 0; k < 3; ++k) {
    const int x0 = px(rng), y0 = py(rng), x1 = std::min(w - 1, x0 + px(rng) / 2), y1 = std::min(h - 1, y0 + py(rng) / 2);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) m.set(x, y, true);
    }
  }
  return m;
}

std::set<PixelCoord> point_set(const Contour& c) { return {c.points.begin(), c.points.end()}; }

WorldState scene(std::vector<CubeObject> cubes) {
  WorldState w(TableBounds{}, NoiseProfile::zero(), 1);
  for (auto& c : cubes) w.add_cube(std::move(c));
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// Color

TEST(RgbToHsv, PureRed) {
  const auto hsv = rgb_to_hsv({255, 0, 0});
  EXPECT_DOUBLE_EQ(hsv.h, 0.0);
  EXPECT_DOUBLE_EQ(hsv.s, 1.0);
  EXPECT_DOUBLE_EQ(hsv.v, 1.0);
}

TEST(RgbToHsv, GrayHasNoSaturation) {
  const auto hsv = rgb_to_hsv({128, 128, 128});
  EXPECT_DOUBLE_EQ(hsv.s, 0.0);
  EXPECT_NEAR(hsv.v, 0.502, 1e-3);
}

TEST(RgbToHsv, Azure) {
  const auto hsv = rgb_to_hsv({0, 128, 255});
  EXPECT_NEAR(hsv.h, 209.88, 0.01);
  EXPECT_DOUBLE_EQ(hsv.s, 1.0);
  EXPECT_DOUBLE_EQ(hsv.v, 1.0);
}

TEST(RgbToHsv, MatchesHexconeOracleOnGrid) {
  for (int r = 0; r < 256; r += 15) {
    for (int g = 0; g < 256; g += 17) {
      for (int b = 0; b < 256; b += 13) {
        const auto got = rgb_to_hsv({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                     static_cast<std::uint8_t>(b)});
        const auto want = oracle::hexcone(r, g, b);
        ASSERT_NEAR(got.h, want.h, 1e-9) << r << ' ' << g << ' ' << b;
        ASSERT_NEAR(got.s, want.s, 1e-12);
        ASSERT_NEAR(got.v, want.v, 1e-12);
        ASSERT_GE(got.h, 0.0);
        ASSERT_LT(got.h, 360.0);
      }
    }
  }
}

TEST(HsvThreshold, UniformImages) {
  const auto red = hsv_threshold(RgbImage(20, 10, cube_rgb(CubeColor::red)), ColorRange::for_cube(CubeColor::red));
  EXPECT_EQ(red.count(), 200u);
  for (CubeColor c : {CubeColor::red, CubeColor::green, CubeColor::blue, CubeColor::yellow}) {
    EXPECT_EQ(hsv_threshold(RgbImage(20, 10, table_rgb()), ColorRange::for_cube(c)).count(), 0u);
  }
}

TEST(HsvThreshold, HueWraparound) {
  const ColorRange wrap{340.0, 20.0, 0.3, 0.3};
  EXPECT_TRUE(wrap.contains({350.0, 1.0, 1.0}));
  EXPECT_TRUE(wrap.contains({10.0, 1.0, 1.0}));
  EXPECT_FALSE(wrap.contains({180.0, 1.0, 1.0}));
  EXPECT_FALSE(wrap.contains({0.0, 0.1, 1.0}));
}

TEST(HsvThreshold, CubeColorsAreSeparable) {
  const CubeColor all[] = {CubeColor::red, CubeColor::green, CubeColor::blue, CubeColor::yellow};
  for (CubeColor pixel : all) {
    for (CubeColor range : all) {
      EXPECT_EQ(ColorRange::for_cube(range).contains(rgb_to_hsv(cube_rgb(pixel))), pixel == range);
    }
  }
}

// ---------------------------------------------------------------------------
// Morphology

TEST(Morphology, EmptyStaysEmpty) { EXPECT_EQ(morph_cleanup(BinaryMask(30, 30)).count(), 0u); }

TEST(Morphology, IsolatedPixelRemoved) {
  BinaryMask m(50, 50);
  m.set(25, 25, true);
  EXPECT_EQ(morph_cleanup(m).count(), 0u);
}

// Holes sit at least one kernel width inside the square: the erosion-first pass
// removes any hole closer to the border together with the strip beside it.
TEST(Morphology, SquareWithSmallHolesRestored) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pos(19, 43);
  for (int trial = 0; trial < 20; ++trial) {
    BinaryMask solid(64, 64);
    for (int y = 12; y < 52; ++y) {
      for (int x = 12; x < 52; ++x) solid.set(x, y, true);
    }
    BinaryMask holed = solid;
    for (int k = 0; k < 3; ++k) {
      const int x = pos(rng), y = pos(rng);
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) holed.set(x + dx, y + dy, false);
      }
    }
    const auto cleaned = morph_cleanup(holed);
    EXPECT_TRUE(cleaned == oracle::cleanup(holed));
    EXPECT_TRUE(cleaned == solid);
  }
}

TEST(Morphology, HoleNearCornerCutsTheCorner) {
  BinaryMask solid(64, 64);
  for (int y = 12; y < 52; ++y) {
    for (int x = 12; x < 52; ++x) solid.set(x, y, true);
  }
  BinaryMask holed = solid;
  for (int y = 18; y < 20; ++y) {
    for (int x = 18; x < 20; ++x) holed.set(x, y, false);
  }
  const auto cleaned = morph_cleanup(holed);
  EXPECT_TRUE(cleaned == oracle::cleanup(holed));
  EXPECT_FALSE(cleaned.at(12, 12));
  EXPECT_TRUE(cleaned.at(30, 30));
}

TEST(Morphology, MatchesBruteForceOnRandomRasters) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 64);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_mask(rng, dim(rng), dim(rng));
    ASSERT_TRUE(erode(m, 7) == oracle::erode(m, 7));
    ASSERT_TRUE(dilate(m, 3) == oracle::dilate(m, 3));
    ASSERT_TRUE(morph_cleanup(m) == oracle::cleanup(m));
  }
}

TEST(Morphology, RejectsEvenKernel) { EXPECT_THROW(erode(BinaryMask(4, 4), 4), Error); }

// ---------------------------------------------------------------------------
// Contours

TEST(TraceContours, EmptyMask) { EXPECT_TRUE(trace_contours(BinaryMask(10, 10)).empty()); }

TEST(TraceContours, SquareBorderPixels) {
  BinaryMask m(20, 20);
  for (int y = 5; y < 15; ++y) {
    for (int x = 3; x < 13; ++x) m.set(x, y, true);
  }
  const auto contours = trace_contours(m);
  ASSERT_EQ(contours.size(), 1u);
  EXPECT_FALSE(contours[0].hole);
  EXPECT_EQ(contours[0].points.size(), 36u);
  const auto want = oracle::outer_borders(m);
  ASSERT_EQ(want.size(), 1u);
  EXPECT_EQ(point_set(contours[0]), want[0]);
}

TEST(TraceContours, TwoBlobs) {
  BinaryMask m(30, 10);
  for (int y = 2; y < 8; ++y) {
    for (int x = 2; x < 8; ++x) m.set(x, y, true);
    for (int x = 15; x < 25; ++x) m.set(x, y, true);
  }
  const auto contours = trace_contours(m);
  EXPECT_EQ(std::count_if(contours.begin(), contours.end(), [](const Contour& c) { return !c.hole; }), 2);
}

TEST(TraceContours, RingHasOuterAndHoleBorder) {
  BinaryMask m(20, 20);
  for (int y = 2; y < 18; ++y) {
    for (int x = 2; x < 18; ++x) m.set(x, y, !(x >= 6 && x < 14 && y >= 6 && y < 14));
  }
  const auto contours = trace_contours(m);
  ASSERT_EQ(contours.size(), 2u);
  EXPECT_FALSE(contours[0].hole);
  EXPECT_TRUE(contours[1].hole);
}

TEST(TraceContours, OuterBordersMatchOracleOnRandomRasters) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(1, 64);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_mask(rng, dim(rng), dim(rng));
    std::vector<std::set<PixelCoord>> got;
    for (const auto& c : trace_contours(m)) {
      if (c.hole) continue;
      for (std::size_t k = 1; k < c.points.size(); ++k) {
        ASSERT_LE(std::abs(c.points[k].x - c.points[k - 1].x), 1);
        ASSERT_LE(std::abs(c.points[k].y - c.points[k - 1].y), 1);
      }
      got.push_back(point_set(c));
    }
    auto want = oracle::outer_borders(m);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    ASSERT_EQ(got, want) << "raster " << i;
  }
}

TEST(ContourMeasures, AreaAndPerimeterOfSquare) {
  Contour c;
  c.points = {{0, 0}, {0, 1}, {0, 2}, {1, 2}, {2, 2}, {2, 1}, {2, 0}, {1, 0}};
  EXPECT_DOUBLE_EQ(contour_area(c), 4.0);
  EXPECT_DOUBLE_EQ(contour_perimeter(c), 8.0);
}

// ---------------------------------------------------------------------------
// Simplification

TEST(Simplify, CollinearKeepsEndpoints) {
  const std::vector<Vec2> pts = {{0, 0}, {5, 0}, {10, 0}};
  const auto out = simplify_polyline(pts, 1.0, false);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], Vec2(0, 0));
  EXPECT_EQ(out[1], Vec2(10, 0));
}

TEST(Simplify, ZeroEpsilonKeepsNonCollinear) {
  const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {2, 1}, {3, 1}, {4, 1}, {5, 3}};
  const auto out = simplify_polyline(pts, 0.0, false);
  EXPECT_EQ(out, (std::vector<Vec2>{{0, 0}, {1, 0}, {2, 1}, {4, 1}, {5, 3}}));
}

TEST(Simplify, Errors) {
  Contour two;
  two.points = {{0, 0}, {1, 1}};
  try {
    simplify(two, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateContour);
  }
  const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {2, 0}};
  EXPECT_THROW(simplify_polyline(pts, -1.0, false), Error);
}

TEST(Simplify, RotatedSquareGivesFourVertices) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ang(0.0, kPi / 2.0);
  for (int i = 0; i < 50; ++i) {
    auto w = scene({CubeObject{"a", CubeColor::red, 0.05, {0, 0, ang(rng)}}});
    const auto mask = hsv_threshold(render(w, CameraModel::top_down()), ColorRange::for_cube(CubeColor::red));
    const auto contours = trace_contours(mask);
    ASSERT_EQ(contours.size(), 1u);
    const double eps = kSimplifyPerimeterFraction * contour_perimeter(contours[0]);
    const auto got = simplify(contours[0], eps);
    std::vector<Vec2> pts;
    for (const auto& p : contours[0].points) pts.emplace_back(p.x, p.y);
    EXPECT_EQ(got, oracle::douglas_peucker(pts, eps, true));
    EXPECT_EQ(got.size(), 4u);
  }
}

TEST(Simplify, EveryPointWithinEpsilon) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> step(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<Vec2> pts = {{0, 0}};
    for (int k = 0; k < 60; ++k) pts.push_back(pts.back() + Vec2(1.0 + std::abs(step(rng)), step(rng)));
    const double eps = 0.5 + i * 0.03;
    const auto out = simplify_polyline(pts, eps, false);
    for (const auto& p : pts) {
      double best = 1e9;
      for (std::size_t k = 0; k + 1 < out.size(); ++k) {
        const Vec2 ab = out[k + 1] - out[k];
        const double t = std::clamp((p - out[k]).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        best = std::min(best, (p - (out[k] + t * ab)).norm());
      }
      EXPECT_LE(best, eps + 1e-12);
    }
  }
}

TEST(Simplify, MatchesRecursiveOracle) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> dim(8, 64);
  std::uniform_real_distribution<double> eps(0.3, 6.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto m = random_mask(rng, dim(rng), dim(rng));
    for (const auto& c : trace_contours(m)) {
      if (c.points.size() < 3) continue;
      const double e = eps(rng);
      std::vector<Vec2> pts;
      for (const auto& p : c.points) pts.emplace_back(p.x, p.y);
      ASSERT_EQ(simplify(c, e), oracle::douglas_peucker(pts, e, c.closed));
      ASSERT_EQ(simplify_polyline(pts, e, false), oracle::douglas_peucker(pts, e, false));
      ++checked;
    }
  }
  EXPECT_GT(checked, 200);
}

// ---------------------------------------------------------------------------
// Corners

TEST(ExtractCorners, AxisAlignedSquareSorted) {
  std::vector<Vec2> pts = {{10, 10}, {20, 20}, {10, 20}, {20, 10}};
  std::mt19937_64 rng(7);
  for (int i = 0; i < 24; ++i) {
    std::shuffle(pts.begin(), pts.end(), rng);
    const auto c = extract_corners(pts).corners;
    EXPECT_EQ(c[0], Vec2(10, 10));  // top-left
    EXPECT_EQ(c[1], Vec2(10, 20));  // bottom-left
    EXPECT_EQ(c[2], Vec2(20, 20));  // bottom-right
    EXPECT_EQ(c[3], Vec2(20, 10));  // top-right
  }
}

TEST(ExtractCorners, DropsNearCollinearVertex) {
  const std::vector<Vec2> pts = {{0, 0}, {0, 10}, {5, 10.2}, {10, 10}, {10, 0}};
  const auto got = extract_corners(pts).corners;
  const auto want = sort_corners(oracle::largest_quad(pts)).corners;
  EXPECT_EQ(got, want);
  for (const auto& p : got) EXPECT_NE(p, Vec2(5, 10.2));
}

TEST(ExtractCorners, MatchesExhaustiveSearchAndIsPermutationInvariant) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<Vec2> pts;
    const int n = 4 + i % 6;
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * kPi * k / n + 0.2 * u(rng);
      pts.emplace_back(50.0 * std::cos(a) + 3.0 * u(rng), 50.0 * std::sin(a) + 3.0 * u(rng));
    }
    const auto got = extract_corners(pts).corners;
    const auto oracle_quad = oracle::largest_quad(pts);
    EXPECT_NEAR(oracle::polygon_area(got), oracle::polygon_area(sort_corners(oracle_quad).corners), 1e-9);
    std::shuffle(pts.begin(), pts.end(), rng);
    EXPECT_EQ(extract_corners(pts).corners, got);
  }
}

TEST(ExtractCorners, TriangleRejected) {
  const std::vector<Vec2> tri = {{0, 0}, {10, 0}, {5, 8}};
  const std::vector<Vec2> tri_plus = {{0, 0}, {10, 0}, {5, 8}, {5, 0}};
  for (const auto* pts : {&tri, &tri_plus}) {
    try {
      extract_corners(*pts);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NotAQuadrilateral);
    }
  }
}

TEST(SortCorners, ConvexAndCounterClockwiseOnScreen) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng);
    std::array<Vec2, 4> q;
    for (int k = 0; k < 4; ++k) q[k] = Vec2(100 + 30 * std::cos(a + k * kPi / 2), 80 + 30 * std::sin(a + k * kPi / 2));
    const auto s = sort_corners(q).corners;
    for (int k = 0; k < 4; ++k) {
      const Vec2 e1 = s[(k + 1) % 4] - s[k], e2 = s[(k + 2) % 4] - s[(k + 1) % 4];
      // Counter-clockwise with v pointing down means a negative cross product in raw pixel coordinates.
      EXPECT_LT(e1.x() * e2.y() - e1.y() * e2.x(), 0.0);
    }
    for (int k = 1; k < 4; ++k) EXPECT_TRUE(s[0].y() < s[k].y() || (s[0].y() == s[k].y() && s[0].x() < s[k].x()));
  }
}

// ---------------------------------------------------------------------------
// Full chain

TEST(EstimateWorldPose, CubeAtOrigin) {
  auto w = scene({CubeObject{"a", CubeColor::red, 0.05, {0, 0, 0}}});
  const auto cam = CameraModel::top_down();
  const auto p = estimate_object_world_pose(render(w, cam), ColorRange::for_cube(CubeColor::red), cam, 0.05);
  EXPECT_NEAR(p.x, 0.0, 1e-4);
  EXPECT_NEAR(p.y, 0.0, 1e-4);
  EXPECT_NEAR(rad_to_deg(p.yaw), 0.0, 0.1);
}

TEST(EstimateWorldPose, OffsetRotatedCube) {
  const PlanarPose truth(0.012, 0.007, deg_to_rad(25.0));
  auto w = scene({CubeObject{"a", CubeColor::green, 0.05, truth}});
  const auto cam = CameraModel::top_down();
  const auto p =
      estimate_object_world_pose(render(w, cam), ColorRange::for_cube(CubeColor::green), cam, 0.05, truth);
  EXPECT_NEAR(p.x, truth.x, 3e-4);
  EXPECT_NEAR(p.y, truth.y, 3e-4);
  EXPECT_NEAR(rad_to_deg(p.yaw), 25.0, 0.5);
}

TEST(EstimateWorldPose, NoTargetColor) {
  auto w = scene({CubeObject{"a", CubeColor::red, 0.05, {0, 0, 0}}});
  const auto cam = CameraModel::top_down();
  try {
    estimate_object_world_pose(render(w, cam), ColorRange::for_cube(CubeColor::blue), cam, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ObjectNotDetected);
  }
}

TEST(EstimateWorldPose, TwoSameColoredCubesAreAmbiguous) {
  auto w = scene({CubeObject{"a", CubeColor::red, 0.05, {-0.1, 0, 0}}, CubeObject{"b", CubeColor::red, 0.05, {0.1, 0, 0}}});
  const auto cam = CameraModel::top_down();
  try {
    estimate_object_world_pose(render(w, cam), ColorRange::for_cube(CubeColor::red), cam, 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AmbiguousDetection);
  }
}

TEST(EstimateWorldPose, QuarterTurnsAgree) {
  const auto cam = CameraModel::top_down();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const PlanarPose base(0.02 * u(rng), 0.02 * u(rng), 0.7 * u(rng));
    const PlanarPose turned(base.x, base.y, base.yaw + kPi / 2.0);
    auto wa = scene({CubeObject{"a", CubeColor::red, 0.05, base}});
    auto wb = scene({CubeObject{"a", CubeColor::red, 0.05, turned}});
    const auto pa = estimate_object_world_pose(render(wa, cam), ColorRange::for_cube(CubeColor::red), cam, 0.05);
    const auto pb = estimate_object_world_pose(render(wb, cam), ColorRange::for_cube(CubeColor::red), cam, 0.05);
    EXPECT_NEAR(wrap_symmetric(pa.yaw - pb.yaw, kPi / 2.0), 0.0, deg_to_rad(0.1));
    EXPECT_NEAR(pa.x, pb.x, 2e-4);
    EXPECT_NEAR(pa.y, pb.y, 2e-4);
  }
}

TEST(EstimateWorldPose, YawResolvedNearExpected) {
  const auto cam = CameraModel::top_down();
  auto w = scene({CubeObject{"a", CubeColor::red, 0.05, {0, 0, deg_to_rad(80.0)}}});
  const auto img = render(w, cam);
  const auto range = ColorRange::for_cube(CubeColor::red);
  EXPECT_NEAR(rad_to_deg(estimate_object_world_pose(img, range, cam, 0.05).yaw), -10.0, 0.2);
  EXPECT_NEAR(rad_to_deg(estimate_object_world_pose(img, range, cam, 0.05, PlanarPose(0, 0, 1.5)).yaw), 80.0, 0.2);
}

TEST(EstimateWorldPose, DebugProductsFilled) {
  const auto cam = CameraModel::top_down();
  auto w = scene({CubeObject{"a", CubeColor::yellow, 0.05, {0.05, -0.03, 0.4}}});
  VisionDebug debug;
  estimate_object_world_pose(render(w, cam), ColorRange::for_cube(CubeColor::yellow), cam, 0.05, std::nullopt, &debug);
  EXPECT_EQ(debug.raw_mask.width(), cam.width);
  EXPECT_GT(debug.clean_mask.count(), 4000u);
  EXPECT_GE(debug.polygon.size(), 4u);
}

TEST(EstimateWorldPose, RejectsWrongImageSize) {
  EXPECT_THROW(estimate_object_world_pose(RgbImage(10, 10), ColorRange::for_cube(CubeColor::red),
                                          CameraModel::top_down(), 0.05),
               Error);
}
