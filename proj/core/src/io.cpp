#include "dynpat/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dynpat {

namespace {

void ensure_little_endian() {
  if constexpr (std::endian::native != std::endian::little)
    throw std::runtime_error("volume io: little-endian hosts only");
}

} // namespace

void write_volume(const std::string& path,
                  const std::vector<std::size_t>& shape,
                  std::span<const double> data, const std::string& kind) {
  ensure_little_endian();
  std::size_t count = 1;
  for (auto s : shape) count *= s;
  if (count != data.size())
    throw std::invalid_argument("write_volume: shape/data mismatch");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_volume: cannot open " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(sizeof(double) * data.size()));
  if (!out) throw std::runtime_error("write_volume: short write to " + path);

  nlohmann::json j;
  j["dtype"] = "float64";
  j["endianness"] = "little";
  j["order"] = "C";
  j["shape"] = shape;
  j["kind"] = kind;
  write_text_file(path + ".json", j.dump(2));
}

Volume read_volume(const std::string& path) {
  ensure_little_endian();
  const auto j = nlohmann::json::parse(read_text_file(path + ".json"));
  if (j.at("dtype").get<std::string>() != "float64")
    throw std::runtime_error("read_volume: unsupported dtype");
  Volume v;
  v.shape = j.at("shape").get<std::vector<std::size_t>>();
  v.kind = j.value("kind", "");
  std::size_t count = 1;
  for (auto s : v.shape) count *= s;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_volume: cannot open " + path);
  v.data.resize(count);
  in.read(reinterpret_cast<char*>(v.data.data()),
          static_cast<std::streamsize>(sizeof(double) * count));
  if (static_cast<std::size_t>(in.gcount()) != sizeof(double) * count)
    throw std::runtime_error("read_volume: truncated file " + path);
  return v;
}

void write_image_seq(const std::string& path, const ImageSeq& p) {
  write_volume(path,
               {static_cast<std::size_t>(p.frames()),
                static_cast<std::size_t>(p.ny()),
                static_cast<std::size_t>(p.nx())},
               p.values(), "image_seq");
}

ImageSeq read_image_seq(const std::string& path) {
  const auto v = read_volume(path);
  if (v.shape.size() != 3)
    throw std::runtime_error("read_image_seq: expected [T, ny, nx]");
  ImageSeq p(static_cast<int>(v.shape[2]), static_cast<int>(v.shape[1]),
             static_cast<int>(v.shape[0]));
  p.values() = v.data;
  return p;
}

void write_motion_seq(const std::string& path, const MotionSeq& v) {
  write_volume(path,
               {static_cast<std::size_t>(v.frames()), 2,
                static_cast<std::size_t>(v.ny()),
                static_cast<std::size_t>(v.nx())},
               v.values(), "motion_seq");
}

MotionSeq read_motion_seq(const std::string& path) {
  const auto vol = read_volume(path);
  if (vol.shape.size() != 4 || vol.shape[1] != 2)
    throw std::runtime_error("read_motion_seq: expected [T, 2, ny, nx]");
  MotionSeq v(static_cast<int>(vol.shape[3]), static_cast<int>(vol.shape[2]),
              static_cast<int>(vol.shape[0]));
  v.values() = vol.data;
  return v;
}

void write_data_seq(const std::string& path, const DataSeq& data) {
  const int T = data.frame_count();
  if (T == 0) throw std::invalid_argument("write_data_seq: empty data");
  const std::size_t rows = data.frames[0].size() / data.m_tau;
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(T) * rows * data.m_tau);
  for (const auto& f : data.frames) {
    if (f.size() != rows * data.m_tau)
      throw std::invalid_argument("write_data_seq: ragged frames unsupported");
    flat.insert(flat.end(), f.begin(), f.end());
  }
  write_volume(path, {static_cast<std::size_t>(T), rows, data.m_tau}, flat,
               "data_seq");
  nlohmann::json j = nlohmann::json::parse(read_text_file(path + ".json"));
  j["sigma"] = data.sigma;
  write_text_file(path + ".json", j.dump(2));
}

DataSeq read_data_seq(const std::string& path) {
  const auto vol = read_volume(path);
  if (vol.shape.size() != 3)
    throw std::runtime_error("read_data_seq: expected [T, rows, m_tau]");
  const auto j = nlohmann::json::parse(read_text_file(path + ".json"));
  DataSeq data;
  data.m_tau = vol.shape[2];
  data.sigma = j.value("sigma", 0.0);
  const std::size_t per = vol.shape[1] * vol.shape[2];
  data.frames.resize(vol.shape[0]);
  for (std::size_t t = 0; t < vol.shape[0]; ++t)
    data.frames[t].assign(vol.data.begin() + t * per,
                          vol.data.begin() + (t + 1) * per);
  return data;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("write_text_file: short write " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trace_csv(const std::string& path, const EnergyTrace& trace) {
  std::ostringstream ss;
  ss << "seconds,label,energy\n";
  ss.precision(17);
  for (const auto& r : trace.records())
    ss << r.seconds << ',' << r.label << ',' << r.energy << '\n';
  write_text_file(path, ss.str());
}

} // namespace dynpat
