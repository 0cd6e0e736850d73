#include "dynpat/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "dynpat/threading.hpp"

namespace dynpat {

EllipseTrack interpolate_track(const FrameEllipse& start,
                               const FrameEllipse& end, int frames) {
  if (frames < 1) throw std::invalid_argument("interpolate_track: frames < 1");
  EllipseTrack track;
  track.frames.resize(frames);
  for (int t = 0; t < frames; ++t) {
    const double w = frames == 1 ? 0.0 : static_cast<double>(t) / (frames - 1);
    auto lerp = [w](double a, double b) { return (1.0 - w) * a + w * b; };
    track.frames[t] = {lerp(start.cx, end.cx),       lerp(start.cy, end.cy),
                       lerp(start.a, end.a),         lerp(start.b, end.b),
                       lerp(start.angle, end.angle), lerp(start.amplitude,
                                                          end.amplitude)};
  }
  return track;
}

std::vector<EllipseTrack> default_phantom_tracks(int frames) {
  // three tubes that drift, rotate and resize smoothly; sized so the paper
  // noise level (sigma 5e-3) yields the reported ~20.65 dB data SNR
  std::vector<EllipseTrack> tracks;
  tracks.push_back(interpolate_track({30, 62, 10.5, 4.5, 0.45, 1.0},
                                     {44, 55, 13.0, 5.7, 1.10, 1.0}, frames));
  tracks.push_back(interpolate_track({63, 30, 4.0, 8.9, -0.50, 0.75},
                                     {56, 42, 4.0, 6.9, 0.35, 0.75}, frames));
  tracks.push_back(interpolate_track({68, 71, 5.7, 5.7, 0.10, 0.5},
                                     {62, 64, 8.1, 4.0, -0.60, 0.5}, frames));
  return tracks;
}

std::string tracks_to_json(const std::vector<EllipseTrack>& tracks) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& track : tracks) {
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& f : track.frames)
      jt.push_back({{"cx", f.cx},
                    {"cy", f.cy},
                    {"a", f.a},
                    {"b", f.b},
                    {"angle", f.angle},
                    {"amplitude", f.amplitude}});
    j.push_back(jt);
  }
  return j.dump(2);
}

std::vector<EllipseTrack> tracks_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<EllipseTrack> tracks;
  for (const auto& jt : j) {
    EllipseTrack track;
    for (const auto& jf : jt)
      track.frames.push_back({jf.at("cx").get<double>(),
                              jf.at("cy").get<double>(),
                              jf.at("a").get<double>(),
                              jf.at("b").get<double>(),
                              jf.at("angle").get<double>(),
                              jf.at("amplitude").get<double>()});
    tracks.push_back(std::move(track));
  }
  return tracks;
}

ImageSeq make_dynamic_phantom(const Grid2D& grid,
                              const std::vector<EllipseTrack>& tracks,
                              int frames) {
  ImageSeq p(grid.nx, grid.ny, frames);
  for (const auto& track : tracks) {
    if (static_cast<int>(track.frames.size()) != frames)
      throw std::invalid_argument(
          "make_dynamic_phantom: track frame count mismatch");
    for (const auto& f : track.frames) {
      const double r = std::max(f.a, f.b);
      if (f.cx - r < 0 || f.cx + r > grid.nx - 1 || f.cy - r < 0 ||
          f.cy + r > grid.ny - 1)
        throw std::invalid_argument(
            "make_dynamic_phantom: ellipse leaves the domain");
    }
  }
  for (int t = 0; t < frames; ++t) {
    auto pt = p.frame(t);
    for (const auto& track : tracks) {
      const auto& e = track.frames[t];
      const double cs = std::cos(e.angle), sn = std::sin(e.angle);
      const double r = std::max(e.a, e.b);
      const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - r)));
      const int x1 = std::min(grid.nx - 1, static_cast<int>(std::ceil(e.cx + r)));
      const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - r)));
      const int y1 = std::min(grid.ny - 1, static_cast<int>(std::ceil(e.cy + r)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const double dx = x - e.cx, dy = y - e.cy;
          const double u = (cs * dx + sn * dy) / e.a;
          const double w = (-sn * dx + cs * dy) / e.b;
          if (u * u + w * w <= 1.0) pt[y * grid.nx + x] += e.amplitude;
        }
    }
    for (auto& v : pt) v = std::clamp(v, 0.0, 1.0);
  }
  return p;
}

SimulatedData simulate_data(const ImageSeq& p, const WaveOperator& fwd,
                            const SamplingSchedule& sched, double sigma,
                            std::uint64_t seed, int threads) {
  if (sigma < 0) throw std::invalid_argument("simulate_data: sigma < 0");
  if (p.pixels() != fwd.grid().pixels())
    throw std::invalid_argument("simulate_data: grid mismatch");
  const int T = p.frames();
  const std::size_t m_tau = static_cast<std::size_t>(fwd.n_tau());

  SimulatedData out;
  out.full.m_tau = m_tau;
  out.full.sigma = sigma;
  out.full.frames.resize(T);
  out.sub.m_tau = m_tau;
  out.sub.sigma = sigma;
  out.sub.frames.resize(T);

  std::vector<double> snr(T, 0.0);
  parallel_for(
      T,
      [&](int t) {
        auto clean = fwd.forward(p.frame(t));
        double ms = 0.0;
        for (double v : clean) ms += v * v;
        ms /= static_cast<double>(clean.size());
        snr[t] = sigma > 0 ? 20.0 * std::log10(std::sqrt(ms) / sigma)
                           : std::numeric_limits<double>::infinity();

        auto noisy = clean;
        if (sigma > 0) {
          std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL * (t + 1));
          std::normal_distribution<double> gauss(0.0, sigma);
          for (auto& v : noisy) v += gauss(rng);
        }
        out.sub.frames[t] = apply_C(sched, t, noisy, m_tau);
        out.full.frames[t] = std::move(noisy);
      },
      threads);

  double mean = 0.0;
  for (double s : snr) mean += s;
  out.mean_snr_db = mean / T;
  return out;
}

SeqMetrics image_metrics(const ImageSeq& p, const ImageSeq& truth) {
  if (!p.same_shape(truth))
    throw std::invalid_argument("image_metrics: shape mismatch");
  const double inf = std::numeric_limits<double>::infinity();
  double peak = 0.0;
  for (double v : truth.values()) peak = std::max(peak, std::abs(v));

  SeqMetrics m;
  const int T = p.frames();
  m.rel_l2.resize(T);
  m.psnr.resize(T);
  for (int t = 0; t < T; ++t) {
    const auto pt = p.frame(t);
    const auto qt = truth.frame(t);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pt.size(); ++i) {
      const double d = pt[i] - qt[i];
      num += d * d;
      den += qt[i] * qt[i];
    }
    m.rel_l2[t] = den > 0 ? std::sqrt(num / den) : (num > 0 ? inf : 0.0);
    const double mse = num / static_cast<double>(pt.size());
    m.psnr[t] = mse > 0 ? 20.0 * std::log10(peak / std::sqrt(mse)) : inf;
  }
  double s1 = 0.0, s2 = 0.0;
  for (int t = 0; t < T; ++t) {
    s1 += m.rel_l2[t];
    s2 += m.psnr[t];
  }
  m.mean_rel_l2 = s1 / T;
  m.mean_psnr = s2 / T;
  return m;
}

} // namespace dynpat
