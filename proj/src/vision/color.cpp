#include "rplace/error.hpp"
#include "rplace/vision.hpp"

#include <algorithm>
#include <cmath>

namespace rplace {

Hsv rgb_to_hsv(Rgb pixel) {
  const double r = pixel.r, g = pixel.g, b = pixel.b;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.v = mx / 255.0;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta == 0.0) return out;
  double h;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / delta, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / delta + 2.0);
  } else {
    h = 60.0 * ((r - g) / delta + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

bool ColorRange::contains(const Hsv& hsv) const {
  if (hsv.s < sat_min || hsv.v < val_min) return false;
  if (hue_min <= hue_max) return hsv.h >= hue_min && hsv.h <= hue_max;
  return hsv.h >= hue_min || hsv.h <= hue_max;
}

void ColorRange::validate() const {
  auto in = [](double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; };
  if (!in(hue_min, 0.0, 360.0) || !in(hue_max, 0.0, 360.0) || !in(sat_min, 0.0, 1.0) || !in(val_min, 0.0, 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "color range out of bounds");
  }
}

ColorRange ColorRange::for_cube(CubeColor color) {
  switch (color) {
    case CubeColor::red: return {330.0, 30.0, 0.45, 0.25};
    case CubeColor::green: return {90.0, 170.0, 0.45, 0.25};
    case CubeColor::blue: return {200.0, 260.0, 0.45, 0.25};
    case CubeColor::yellow: return {35.0, 75.0, 0.45, 0.25};
  }
  return {};
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask hsv_threshold(const RgbImage& image, const ColorRange& range) {
  range.validate();
  BinaryMask mask(image.width(), image.height());
  // Integer pre-rejection with one level of slack; survivors get the exact test.
  const int val_floor = static_cast<int>(std::floor(range.val_min * 255.0)) - 1;
  const auto& px = image.bytes();
  auto& bits = mask.bits();
  for (std::size_t i = 0, p = 0; i < bits.size(); ++i, p += 3) {
    const int r = px[p], g = px[p + 1], b = px[p + 2];
    const int mx = std::max({r, g, b});
    const int mn = std::min({r, g, b});
    if (mx < val_floor) continue;
    if (static_cast<double>(mx - mn) + 1.0 < range.sat_min * mx) continue;
    bits[i] = range.contains(rgb_to_hsv({px[p], px[p + 1], px[p + 2]})) ? 1 : 0;
  }
  return mask;
}

}  // namespace rplace
