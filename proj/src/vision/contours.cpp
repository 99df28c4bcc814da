#include "rplace/vision.hpp"

#include <array>
#include <cmath>
#include <cstdlib>

namespace rplace {

namespace {

// 8-neighbourhood, index increasing counter-clockwise on screen (y grows down).
constexpr std::array<int, 8> kDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_of(int dx, int dy) {
  for (int k = 0; k < 8; ++k) {
    if (kDx[k] == dx && kDy[k] == dy) return k;
  }
  return -1;
}

// Label image padded by a one-pixel frame of zeros.
class LabelImage {
 public:
  LabelImage(const BinaryMask& mask, int x0, int y0, int x1, int y1)
      : x0_(x0), y0_(y0), w_(x1 - x0 + 3), h_(y1 - y0 + 3), data_(static_cast<std::size_t>(w_) * h_, 0) {
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (mask.at(x, y)) at(x - x0 + 1, y - y0 + 1) = 1;
      }
    }
  }

  int& at(int px, int py) { return data_[static_cast<std::size_t>(py) * w_ + px]; }
  int width() const { return w_; }
  int height() const { return h_; }
  PixelCoord to_image(int px, int py) const { return {px - 1 + x0_, py - 1 + y0_}; }

 private:
  int x0_, y0_, w_, h_;
  std::vector<int> data_;
};

// Follows one border starting at (sx, sy); (bx, by) is the zero pixel the
// border was entered from. Marks the border in `f` with +/-nbd.
Contour follow_border(LabelImage& f, int sx, int sy, int bx, int by, int nbd, bool hole) {
  Contour contour;
  contour.hole = hole;

  // Clockwise search for the first non-zero neighbour, starting at the entry pixel.
  const int start_dir = direction_of(bx - sx, by - sy);
  int found = -1;
  for (int k = 0; k < 8; ++k) {
    const int d = (start_dir - k + 8) % 8;
    if (f.at(sx + kDx[d], sy + kDy[d]) != 0) {
      found = d;
      break;
    }
  }
  if (found < 0) {
    f.at(sx, sy) = -nbd;
    contour.points.push_back(f.to_image(sx, sy));
    contour.closed = false;
    return contour;
  }

  const int x1 = sx + kDx[found], y1 = sy + kDy[found];
  int x2 = x1, y2 = y1;  // previous border pixel
  int x3 = sx, y3 = sy;  // current border pixel
  while (true) {
    contour.points.push_back(f.to_image(x3, y3));
    // Counter-clockwise search around (x3, y3), starting after the previous pixel.
    const int from = direction_of(x2 - x3, y2 - y3);
    bool east_zero_examined = false;
    int x4 = 0, y4 = 0;
    for (int k = 1; k <= 8; ++k) {
      const int d = (from + k) % 8;
      const int nx = x3 + kDx[d], ny = y3 + kDy[d];
      if (f.at(nx, ny) != 0) {
        x4 = nx;
        y4 = ny;
        break;
      }
      if (d == 0) east_zero_examined = true;
    }
    if (east_zero_examined) {
      f.at(x3, y3) = -nbd;
    } else if (f.at(x3, y3) == 1) {
      f.at(x3, y3) = nbd;
    }
    if (x4 == sx && y4 == sy && x3 == x1 && y3 == y1) break;
    x2 = x3;
    y2 = y3;
    x3 = x4;
    y3 = y4;
  }
  contour.closed = contour.points.size() >= 4;
  return contour;
}

}  // namespace

std::vector<Contour> trace_contours(const BinaryMask& mask) {
  std::vector<Contour> out;
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return out;

  LabelImage f(mask, x0, y0, x1, y1);
  int nbd = 1;
  for (int py = 1; py < f.height() - 1; ++py) {
    for (int px = 1; px < f.width() - 1; ++px) {
      const int v = f.at(px, py);
      if (v == 0) continue;
      if (v == 1 && f.at(px - 1, py) == 0) {
        ++nbd;
        out.push_back(follow_border(f, px, py, px - 1, py, nbd, false));
      } else if (v >= 1 && f.at(px + 1, py) == 0) {
        ++nbd;
        out.push_back(follow_border(f, px, py, px + 1, py, nbd, true));
      }
    }
  }
  return out;
}

double contour_perimeter(const Contour& contour) {
  const auto& p = contour.points;
  if (p.size() < 2) return 0.0;
  double len = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    len += std::hypot(static_cast<double>(b.x - a.x), static_cast<double>(b.y - a.y));
  }
  return len;
}

double contour_area(const Contour& contour) {
  const auto& p = contour.points;
  double a2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    a2 += static_cast<double>(a.x) * b.y - static_cast<double>(b.x) * a.y;
  }
  return std::abs(a2) / 2.0;
}

}  // namespace rplace
