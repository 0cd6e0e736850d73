#include "dynpat/flow_render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dynpat {

namespace {

void hsv_to_rgb(double h, double s, double v, unsigned char* rgb) {
  h = h - std::floor(h); // hue wraps
  const double c = v * s;
  const double hp = 6.0 * h;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c; g = x;
  } else if (hp < 2) {
    r = x; g = c;
  } else if (hp < 3) {
    g = c; b = x;
  } else if (hp < 4) {
    g = x; b = c;
  } else if (hp < 5) {
    r = x; b = c;
  } else {
    r = c; b = x;
  }
  const double m = v - c;
  rgb[0] = static_cast<unsigned char>(std::lround((r + m) * 255.0));
  rgb[1] = static_cast<unsigned char>(std::lround((g + m) * 255.0));
  rgb[2] = static_cast<unsigned char>(std::lround((b + m) * 255.0));
}

double hue_of(double x, double y) {
  return (std::atan2(y, x) + std::numbers::pi) / (2.0 * std::numbers::pi);
}

} // namespace

std::vector<unsigned char> render_flow_colorwheel(const double* vx,
                                                  const double* vy, int nx,
                                                  int ny, int border) {
  const int w = nx + 2 * border, h = ny + 2 * border;
  std::vector<unsigned char> rgb(static_cast<std::size_t>(w) * h * 3, 255);

  double max_norm = 0.0;
  for (int i = 0; i < nx * ny; ++i)
    max_norm = std::max(max_norm, std::hypot(vx[i], vy[i]));

  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const int i = y * nx + x;
      const double norm = std::hypot(vx[i], vy[i]);
      const double sat = max_norm > 0 ? norm / max_norm : 0.0;
      const double hue = norm > 0 ? hue_of(vx[i], vy[i]) : 0.0;
      hsv_to_rgb(hue, sat, 1.0,
                 rgb.data() +
                     3 * (static_cast<std::size_t>(y + border) * w + x + border));
    }

  const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool in_border =
          x < border || y < border || x >= w - border || y >= h - border;
      if (!in_border) continue;
      hsv_to_rgb(hue_of(x - cx, y - cy), 1.0, 1.0,
                 rgb.data() + 3 * (static_cast<std::size_t>(y) * w + x));
    }
  return rgb;
}

void remove_mean_flow(MotionSeq& v) {
  const int n = v.pixels();
  for (int t = 0; t < v.frames(); ++t)
    for (int comp = 0; comp < 2; ++comp) {
      auto c = v.component(t, comp);
      double mean = 0.0;
      for (double x : c) mean += x;
      mean /= n;
      for (auto& x : c) x -= mean;
    }
}

} // namespace dynpat
