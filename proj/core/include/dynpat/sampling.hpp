#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dynpat {

/// Periodic sensor sub-sampling schedule. Frame t reads the sensor channels
/// listed in sensors_for(t); within one period the per-frame sets are
/// pairwise disjoint and cover all M channels, so the stacked selection
/// operators form a row permutation of the identity.
struct SamplingSchedule {
  int total_sensors = 0;                        ///< M
  std::vector<std::vector<int>> frame_sensors;  ///< one sorted list per frame

  int period() const { return static_cast<int>(frame_sensors.size()); }
  const std::vector<int>& sensors_for(int t) const {
    return frame_sensors[t % period()];
  }
  int rows_for(int t) const {
    return static_cast<int>(sensors_for(t).size());
  }
};

/// Random disjoint partition of {0..M-1} into m_sub frames of M/m_sub
/// channels each (seeded shuffle split into consecutive blocks, each block
/// sorted). Throws if M is not divisible by m_sub.
SamplingSchedule make_rsp_schedule(int total_sensors, int m_sub,
                                   std::uint64_t seed);

/// Full sampling: every frame reads all channels (period 1).
SamplingSchedule make_full_schedule(int total_sensors);

/// Row selection: keeps the m_tau-sample time series of the channels in
/// frame t's sensor set. Input is M x m_tau row-major, output M_c x m_tau.
std::vector<double> apply_C(const SamplingSchedule& sched, int t,
                            std::span<const double> full, std::size_t m_tau);

/// Exact transpose of apply_C: scatters the selected rows back into an
/// M x m_tau block, zero elsewhere.
std::vector<double> apply_C_adjoint(const SamplingSchedule& sched, int t,
                                    std::span<const double> sub,
                                    std::size_t m_tau);

std::string schedule_to_json(const SamplingSchedule& sched);
SamplingSchedule schedule_from_json(const std::string& text);

} // namespace dynpat
