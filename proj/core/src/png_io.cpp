#include "dynpat/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace dynpat {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

void write_png(const std::string& path, const std::vector<unsigned char>& bytes,
               int nx, int ny, int color_type, int channels) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("write_png: cannot open " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("write_png: init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png: info init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: libpng error writing " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, nx, ny, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(ny);
  for (int y = 0; y < ny; ++y)
    rows[y] = const_cast<png_bytep>(bytes.data() +
                                    static_cast<std::size_t>(y) * nx * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

} // namespace

void write_png_gray(const std::string& path, const double* img, int nx, int ny,
                    double vmin, double vmax) {
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  std::vector<unsigned char> bytes(static_cast<std::size_t>(nx) * ny);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double w = std::clamp((img[i] - vmin) / span, 0.0, 1.0);
    bytes[i] = static_cast<unsigned char>(std::lround(w * 255.0));
  }
  write_png(path, bytes, nx, ny, PNG_COLOR_TYPE_GRAY, 1);
}

void write_png_rgb(const std::string& path, const unsigned char* rgb, int nx,
                   int ny) {
  std::vector<unsigned char> bytes(rgb, rgb + static_cast<std::size_t>(nx) * ny * 3);
  write_png(path, bytes, nx, ny, PNG_COLOR_TYPE_RGB, 3);
}

} // namespace dynpat
