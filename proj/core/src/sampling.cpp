#include "dynpat/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace dynpat {

SamplingSchedule make_rsp_schedule(int total_sensors, int m_sub,
                                   std::uint64_t seed) {
  if (total_sensors < 1 || m_sub < 1)
    throw std::invalid_argument("make_rsp_schedule: counts must be positive");
  if (total_sensors % m_sub != 0)
    throw std::invalid_argument(
        "make_rsp_schedule: sensor count not divisible by sub-sampling factor");
  const int per_frame = total_sensors / m_sub;

  std::vector<int> perm(total_sensors);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  SamplingSchedule sched;
  sched.total_sensors = total_sensors;
  sched.frame_sensors.resize(m_sub);
  for (int t = 0; t < m_sub; ++t) {
    auto& s = sched.frame_sensors[t];
    s.assign(perm.begin() + t * per_frame, perm.begin() + (t + 1) * per_frame);
    std::sort(s.begin(), s.end());
  }
  return sched;
}

SamplingSchedule make_full_schedule(int total_sensors) {
  SamplingSchedule sched;
  sched.total_sensors = total_sensors;
  sched.frame_sensors.resize(1);
  sched.frame_sensors[0].resize(total_sensors);
  std::iota(sched.frame_sensors[0].begin(), sched.frame_sensors[0].end(), 0);
  return sched;
}

std::vector<double> apply_C(const SamplingSchedule& sched, int t,
                            std::span<const double> full, std::size_t m_tau) {
  if (full.size() != static_cast<std::size_t>(sched.total_sensors) * m_tau)
    throw std::invalid_argument("apply_C: full data shape mismatch");
  const auto& rows = sched.sensors_for(t);
  std::vector<double> sub(rows.size() * m_tau);
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy_n(full.data() + static_cast<std::size_t>(rows[r]) * m_tau, m_tau,
                sub.data() + r * m_tau);
  return sub;
}

std::vector<double> apply_C_adjoint(const SamplingSchedule& sched, int t,
                                    std::span<const double> sub,
                                    std::size_t m_tau) {
  const auto& rows = sched.sensors_for(t);
  if (sub.size() != rows.size() * m_tau)
    throw std::invalid_argument("apply_C_adjoint: sub data shape mismatch");
  std::vector<double> full(static_cast<std::size_t>(sched.total_sensors) * m_tau,
                           0.0);
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy_n(sub.data() + r * m_tau, m_tau,
                full.data() + static_cast<std::size_t>(rows[r]) * m_tau);
  return full;
}

std::string schedule_to_json(const SamplingSchedule& sched) {
  nlohmann::json j;
  j["total_sensors"] = sched.total_sensors;
  j["frame_sensors"] = sched.frame_sensors;
  return j.dump(2);
}

SamplingSchedule schedule_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SamplingSchedule sched;
  sched.total_sensors = j.at("total_sensors").get<int>();
  sched.frame_sensors =
      j.at("frame_sensors").get<std::vector<std::vector<int>>>();
  if (sched.frame_sensors.empty())
    throw std::invalid_argument("schedule_from_json: empty schedule");
  return sched;
}

} // namespace dynpat
