#include "rplace/error.hpp"
#include "rplace/vision.hpp"

#include <algorithm>

namespace rplace {

namespace {

struct Box {
  int x0, y0, x1, y1;  // inclusive; empty when x0 > x1
  bool empty() const { return x0 > x1 || y0 > y1; }
};

Box bounding_box(const BinaryMask& m) {
  Box b{m.width(), m.height(), -1, -1};
  for (int y = 0; y < m.height(); ++y) {
    const std::uint8_t* row = m.bits().data() + static_cast<std::size_t>(y) * m.width();
    for (int x = 0; x < m.width(); ++x) {
      if (row[x]) {
        b.x0 = std::min(b.x0, x);
        b.x1 = std::max(b.x1, x);
        b.y0 = std::min(b.y0, y);
        b.y1 = std::max(b.y1, y);
      }
    }
  }
  return b;
}

// Sliding-window count of set pixels along one line of `n` samples spaced by
// `stride`, restricted to output positions [lo, hi]. Erosion keeps a sample
// when every in-image neighbour within `radius` is set; dilation when any is.
void filter_line(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride, int radius, int lo,
                 int hi, bool erosion) {
  int start = std::max(0, lo - radius);
  int end = std::min(n - 1, lo + radius);
  int ones = 0;
  for (int k = start; k <= end; ++k) ones += in[k * stride];
  for (int i = lo; i <= hi; ++i) {
    const int window = end - start + 1;
    out[i * stride] = erosion ? (ones == window) : (ones > 0);
    // advance window to i + 1
    const int next_start = std::max(0, i + 1 - radius);
    const int next_end = std::min(n - 1, i + 1 + radius);
    if (next_start > start) ones -= in[start * stride];
    if (next_end > end) ones += in[next_end * stride];
    start = next_start;
    end = next_end;
  }
}

Box grow(const Box& b, int r, int w, int h) {
  return {std::max(0, b.x0 - r), std::max(0, b.y0 - r), std::min(w - 1, b.x1 + r), std::min(h - 1, b.y1 + r)};
}

// `box` must contain every set pixel of `mask`.
BinaryMask filter(const BinaryMask& mask, int kernel, bool erosion, Box box) {
  if (kernel < 1 || kernel % 2 == 0) throw Error(ErrorCode::InvalidArgument, "kernel size must be odd and positive");
  const int w = mask.width();
  const int h = mask.height();
  const int r = kernel / 2;
  BinaryMask out(w, h);
  if (box.empty()) return out;
  if (!erosion) box = grow(box, r, w, h);
  // Horizontal pass over rows that may hold set pixels, vertical pass over the box.
  BinaryMask tmp(w, h);
  const std::uint8_t* src = mask.bits().data();
  std::uint8_t* mid = tmp.bits().data();
  for (int y = box.y0; y <= box.y1; ++y) {
    const std::size_t off = static_cast<std::size_t>(y) * w;
    filter_line(src + off, mid + off, w, 1, r, box.x0, box.x1, erosion);
  }
  std::uint8_t* dst = out.bits().data();
  for (int x = box.x0; x <= box.x1; ++x) {
    filter_line(mid + x, dst + x, h, w, r, box.y0, box.y1, erosion);
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int kernel) { return filter(mask, kernel, true, bounding_box(mask)); }

BinaryMask dilate(const BinaryMask& mask, int kernel) { return filter(mask, kernel, false, bounding_box(mask)); }

BinaryMask morph_cleanup(const BinaryMask& mask) {
  const int r = kMorphKernel / 2;
  const Box box = bounding_box(mask);
  if (box.empty()) return BinaryMask(mask.width(), mask.height());
  const BinaryMask opened = filter(filter(mask, kMorphKernel, true, box), kMorphKernel, false, box);
  const Box opened_box = grow(box, r, mask.width(), mask.height());
  const BinaryMask dilated = filter(opened, kMorphKernel, false, opened_box);
  return filter(dilated, kMorphKernel, true, grow(opened_box, r, mask.width(), mask.height()));
}

}  // namespace rplace
