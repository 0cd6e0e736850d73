#pragma once

#include <string>
#include <vector>

namespace dynpat {

/// 8-bit grayscale PNG with a fixed display window [vmin, vmax].
void write_png_gray(const std::string& path, const double* img, int nx, int ny,
                    double vmin, double vmax);

/// 8-bit RGB PNG; rgb is row-major, 3 bytes per pixel.
void write_png_rgb(const std::string& path, const unsigned char* rgb, int nx,
                   int ny);

} // namespace dynpat
