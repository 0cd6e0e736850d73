#pragma once

#include <span>
#include <string>
#include <vector>

#include "dynpat/sampling.hpp"
#include "dynpat/types.hpp"

namespace dynpat {

// Volume files: flat little-endian float64 arrays with a JSON sidecar
// (<path>.json) that records dtype, shape, row-major order and a free-form
// kind tag. Shapes: image sequences [T, ny, nx], motion [T, 2, ny, nx],
// data blocks [T, rows, m_tau].

struct Volume {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::string kind;
};

void write_volume(const std::string& path,
                  const std::vector<std::size_t>& shape,
                  std::span<const double> data, const std::string& kind);
Volume read_volume(const std::string& path);

void write_image_seq(const std::string& path, const ImageSeq& p);
ImageSeq read_image_seq(const std::string& path);

void write_motion_seq(const std::string& path, const MotionSeq& v);
MotionSeq read_motion_seq(const std::string& path);

/// Requires a uniform per-frame row count (true for periodic schedules).
void write_data_seq(const std::string& path, const DataSeq& data);
DataSeq read_data_seq(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// CSV with columns seconds,label,energy.
void write_trace_csv(const std::string& path, const EnergyTrace& trace);

} // namespace dynpat
