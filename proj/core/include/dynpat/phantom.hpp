#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynpat/sampling.hpp"
#include "dynpat/types.hpp"
#include "dynpat/wave.hpp"

namespace dynpat {

struct FrameEllipse {
  double cx = 0, cy = 0;    ///< center [px]
  double a = 1, b = 1;      ///< semi-axes [px]
  double angle = 0;         ///< rotation [rad]
  double amplitude = 1;
};

/// One moving ellipse, sampled per frame.
struct EllipseTrack {
  std::vector<FrameEllipse> frames;
};

/// Linear interpolation between a start and an end pose over `frames` frames.
EllipseTrack interpolate_track(const FrameEllipse& start,
                               const FrameEllipse& end, int frames);

/// Three smoothly moving, rotating and resizing tubes. The trajectories are
/// also shipped as configs/phantom_default.json; this is the same data.
std::vector<EllipseTrack> default_phantom_tracks(int frames);

std::string tracks_to_json(const std::vector<EllipseTrack>& tracks);
std::vector<EllipseTrack> tracks_from_json(const std::string& text);

/// Rasterizes the tracks (additive amplitudes, clipped to [0,1]). Every
/// ellipse must stay inside the grid for all frames.
ImageSeq make_dynamic_phantom(const Grid2D& grid,
                              const std::vector<EllipseTrack>& tracks,
                              int frames);

struct SimulatedData {
  DataSeq full;        ///< all channels, with noise
  DataSeq sub;         ///< schedule-selected channels, same noise realization
  double mean_snr_db;  ///< 20 log10(rms(signal)/sigma), averaged over frames
};

/// Per-frame acoustic simulation plus seeded white Gaussian noise of
/// standard deviation sigma; the sub-sampled blocks are extracted from the
/// same noisy records.
SimulatedData simulate_data(const ImageSeq& p, const WaveOperator& fwd,
                            const SamplingSchedule& sched, double sigma,
                            std::uint64_t seed, int threads = 0);

struct SeqMetrics {
  std::vector<double> rel_l2;
  std::vector<double> psnr;
  double mean_rel_l2 = 0.0;
  double mean_psnr = 0.0;
};

/// Relative l2 error and peak SNR per frame (peak = max of the reference).
SeqMetrics image_metrics(const ImageSeq& p, const ImageSeq& truth);

} // namespace dynpat
