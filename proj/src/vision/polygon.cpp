#include "rplace/error.hpp"
#include "rplace/vision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

namespace rplace {

namespace {

// Squared point-to-segment distance as num / den, so lattice inputs compare exactly.
struct SquaredDistance {
  double num;
  double den;
  bool operator>(const SquaredDistance& o) const { return num * o.den > o.num * den; }
};

SquaredDistance segment_distance2(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double along = (p - a).dot(ab);
  if (len2 == 0.0 || along <= 0.0) return {(p - a).squaredNorm(), 1.0};
  if (along >= len2) return {(p - b).squaredNorm(), 1.0};
  const double c = ab.x() * (p.y() - a.y()) - ab.y() * (p.x() - a.x());
  return {c * c, len2};
}

// Marks the vertices kept on the open chain pts[first..last] (inclusive).
void douglas_peucker(std::span<const Vec2> pts, std::size_t first, std::size_t last, double epsilon,
                     std::vector<bool>& keep) {
  const SquaredDistance eps2{epsilon * epsilon, 1.0};
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{first, last}};
  keep[first] = true;
  keep[last] = true;
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    if (hi <= lo + 1) continue;
    SquaredDistance best{-1.0, 1.0};
    std::size_t best_i = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const SquaredDistance d = segment_distance2(pts[i], pts[lo], pts[hi]);
      if (d > best) {
        best = d;
        best_i = i;
      }
    }
    if (best > eps2) {
      keep[best_i] = true;
      stack.push_back({best_i, hi});
      stack.push_back({lo, best_i});
    }
  }
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double quad_area(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  return 0.5 * std::abs(cross(a, b, c) + cross(a, c, d));
}

}  // namespace

std::vector<Vec2> simplify_polyline(std::span<const Vec2> points, double epsilon, bool closed) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  if (points.size() < 3) throw Error(ErrorCode::DegenerateContour, "need at least 3 points");
  std::vector<Vec2> out;
  if (!closed) {
    std::vector<bool> keep(points.size(), false);
    douglas_peucker(points, 0, points.size() - 1, epsilon, keep);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (keep[i]) out.push_back(points[i]);
    }
    return out;
  }

  // Closed: split at the point farthest from point 0 and the point farthest
  // from that one; both chains run over the doubled ring.
  const std::size_t n = points.size();
  auto farthest_from = [&](std::size_t from) {
    std::size_t far = from;
    double far_d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (points[i] - points[from]).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    return far;
  };
  const std::size_t f1 = farthest_from(0);
  if (f1 == 0) return {points[0]};
  const std::size_t f2 = farthest_from(f1);
  const std::size_t a = std::min(f1, f2), b = std::max(f1, f2);
  std::vector<Vec2> ring(points.begin(), points.end());
  ring.insert(ring.end(), points.begin(), points.end());
  std::vector<bool> keep(ring.size(), false);
  douglas_peucker(ring, a, b, epsilon, keep);
  douglas_peucker(ring, b, a + n, epsilon, keep);
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i] || keep[i + n]) out.push_back(ring[i]);
  }
  return out;
}

std::vector<Vec2> simplify(const Contour& contour, double epsilon) {
  std::vector<Vec2> pts;
  pts.reserve(contour.points.size());
  for (const auto& p : contour.points) pts.emplace_back(p.x, p.y);
  return simplify_polyline(pts, epsilon, contour.closed);
}

CornerSet sort_corners(const std::array<Vec2, 4>& corners) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& c : corners) centroid += c;
  centroid /= 4.0;
  std::array<Vec2, 4> sorted = corners;
  // Screen angle (v grows downward, so flip it): increasing angle is counter-clockwise on screen.
  auto angle = [&](const Vec2& p) { return std::atan2(-(p.y() - centroid.y()), p.x() - centroid.x()); };
  std::sort(sorted.begin(), sorted.end(), [&](const Vec2& a, const Vec2& b) {
    const double aa = angle(a), ab = angle(b);
    if (aa != ab) return aa < ab;
    return a.y() < b.y() || (a.y() == b.y() && a.x() < b.x());
  });
  std::size_t first = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    const auto& c = sorted[i];
    const auto& f = sorted[first];
    if (c.y() < f.y() || (c.y() == f.y() && c.x() < f.x())) first = i;
  }
  CornerSet out;
  for (std::size_t i = 0; i < 4; ++i) out.corners[i] = sorted[(first + i) % 4];
  return out;
}

CornerSet extract_corners(std::span<const Vec2> polygon) {
  if (polygon.size() < 4) throw Error(ErrorCode::NotAQuadrilateral, "polygon has fewer than 4 vertices");
  // The largest inscribed quadrilateral has its vertices on the convex hull.
  const std::vector<Vec2> hull = convex_hull(std::vector<Vec2>(polygon.begin(), polygon.end()));
  if (hull.size() < 4) throw Error(ErrorCode::NotAQuadrilateral, "vertices do not span a quadrilateral");
  double best = -1.0;
  std::array<std::size_t, 4> pick{};
  const std::size_t n = hull.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t c = b + 1; c < n; ++c) {
        for (std::size_t d = c + 1; d < n; ++d) {
          const double area = quad_area(hull[a], hull[b], hull[c], hull[d]);
          if (area > best) {
            best = area;
            pick = {a, b, c, d};
          }
        }
      }
    }
  }
  const std::array<Vec2, 4> quad = {hull[pick[0]], hull[pick[1]], hull[pick[2]], hull[pick[3]]};
  // Hull order is convex; reject slivers that would break the pose solver.
  double scale = 0.0;
  for (const auto& p : quad) scale = std::max(scale, (p - quad[0]).norm());
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::abs(cross(quad[i], quad[(i + 1) % 4], quad[(i + 2) % 4])) <= 1e-9 * scale * scale) {
      throw Error(ErrorCode::NotAQuadrilateral, "degenerate quadrilateral");
    }
  }
  return sort_corners(quad);
}

namespace {

struct Line {
  Vec2 point;
  Vec2 direction;
};

std::optional<Vec2> intersect(const Line& a, const Line& b) {
  const double det = a.direction.x() * b.direction.y() - a.direction.y() * b.direction.x();
  if (std::abs(det) < 1e-12) return std::nullopt;
  const Vec2 d = b.point - a.point;
  const double t = (d.x() * b.direction.y() - d.y() * b.direction.x()) / det;
  return a.point + t * a.direction;
}

// Locates the face edge from `a` to `b`. Scan lines run across the edge
// (rows for steep edges, columns for flat ones). On each, the fraction of the
// face color summed over a window that starts fully outside and ends fully
// inside equals the inside length, which pins the edge crossing to subpixel
// accuracy for an area-sampled straight edge.
std::optional<Line> measure_edge(const RgbImage& img, const Vec2& a, const Vec2& b, const Vec2& inside, int radius) {
  const Vec2 d = b - a;
  const bool steep = std::abs(d.y()) >= std::abs(d.x());
  // major: coordinate the scan lines are indexed by; minor: coordinate along a scan line.
  const int major_axis = steep ? 1 : 0;
  const int minor_axis = 1 - major_axis;
  const double dmaj = d[major_axis];
  if (std::abs(dmaj) < 8.0) return std::nullopt;
  const double slope = d[minor_axis] / dmaj;
  const double lo_maj = std::min(a[major_axis], b[major_axis]) + 0.15 * std::abs(dmaj);
  const double hi_maj = std::max(a[major_axis], b[major_axis]) - 0.15 * std::abs(dmaj);
  const double inside_minor = inside[minor_axis] - (a[minor_axis] + (inside[major_axis] - a[major_axis]) * slope);
  const int inward = inside_minor > 0.0 ? 1 : -1;
  const int major_extent = steep ? img.height() : img.width();
  const int minor_extent = steep ? img.width() : img.height();
  auto pixel = [&](int minor, int major) { return steep ? img.at(minor, major) : img.at(major, minor); };

  struct Scan {
    int major;
    int start;  // first minor index of the window
  };
  std::vector<Scan> scans;
  Eigen::Vector3d outside_sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d inside_sum = Eigen::Vector3d::Zero();
  for (int m = static_cast<int>(std::ceil(lo_maj)); m <= static_cast<int>(std::floor(hi_maj)); ++m) {
    if (m < 0 || m >= major_extent) continue;
    const double minor_line = a[minor_axis] + (m - a[major_axis]) * slope;
    const int center = static_cast<int>(std::lround(minor_line));
    const int start = center - radius;
    const int end = center + radius;
    if (start < 0 || end >= minor_extent) continue;
    scans.push_back({m, start});
    const Rgb out_px = pixel(inward > 0 ? start : end, m);
    const Rgb in_px = pixel(inward > 0 ? end : start, m);
    outside_sum += Eigen::Vector3d(out_px.r, out_px.g, out_px.b);
    inside_sum += Eigen::Vector3d(in_px.r, in_px.g, in_px.b);
  }
  if (scans.size() < 5) return std::nullopt;
  const Eigen::Vector3d outside = outside_sum / static_cast<double>(scans.size());
  const Eigen::Vector3d contrast = inside_sum / static_cast<double>(scans.size()) - outside;
  const double contrast2 = contrast.squaredNorm();
  if (contrast2 < 100.0) return std::nullopt;

  // Least squares minor = alpha + beta * major.
  double sm = 0.0, sn = 0.0, smm = 0.0, smn = 0.0;
  for (const auto& s : scans) {
    double coverage = 0.0;
    for (int k = 0; k <= 2 * radius; ++k) {
      const Rgb p = pixel(s.start + k, s.major);
      coverage += (Eigen::Vector3d(p.r, p.g, p.b) - outside).dot(contrast) / contrast2;
    }
    const double crossing =
        inward > 0 ? (s.start + 2 * radius + 0.5) - coverage : (s.start - 0.5) + coverage;
    sm += s.major;
    sn += crossing;
    smm += static_cast<double>(s.major) * s.major;
    smn += s.major * crossing;
  }
  const double n = static_cast<double>(scans.size());
  const double denom = n * smm - sm * sm;
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double beta = (n * smn - sm * sn) / denom;
  const double alpha = (sn - beta * sm) / n;
  const double mid = sm / n;
  Line line;
  line.point[major_axis] = mid;
  line.point[minor_axis] = alpha + beta * mid;
  line.direction[major_axis] = 1.0;
  line.direction[minor_axis] = beta;
  return line;
}

std::optional<CornerSet> refine_once(const CornerSet& coarse, const RgbImage& image, int radius) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& c : coarse.corners) centroid += c;
  centroid /= 4.0;
  std::array<Line, 4> edges;
  for (std::size_t i = 0; i < 4; ++i) {
    auto line = measure_edge(image, coarse.corners[i], coarse.corners[(i + 1) % 4], centroid, radius);
    if (!line) return std::nullopt;
    edges[i] = *line;
  }
  std::array<Vec2, 4> refined;
  for (std::size_t i = 0; i < 4; ++i) {
    auto p = intersect(edges[(i + 3) % 4], edges[i]);
    if (!p) return std::nullopt;
    refined[i] = *p;
  }
  return sort_corners(refined);
}

}  // namespace

CornerSet refine_corners(const CornerSet& coarse, const RgbImage& image) {
  // A simplified contour may cut a corner by several pixels, so the first pass
  // uses a wide window and later passes tighten it around the measured edge.
  constexpr double kMaxShift = 15.0;  // pixels
  constexpr std::array<int, 3> kRadii = {10, 6, 4};
  CornerSet current = coarse;
  for (const int radius : kRadii) {
    auto next = refine_once(current, image, radius);
    if (!next) break;
    current = *next;
  }
  const CornerSet sorted_coarse = sort_corners(coarse.corners);
  for (std::size_t i = 0; i < 4; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& c : sorted_coarse.corners) nearest = std::min(nearest, (c - current.corners[i]).norm());
    if (!(nearest <= kMaxShift)) return coarse;
  }
  return current;
}

}  // namespace rplace
