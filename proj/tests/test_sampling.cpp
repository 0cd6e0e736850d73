#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "dynpat/sampling.hpp"
#include "oracles.hpp"

using namespace dynpat;

TEST_CASE("rsp schedule partitions the sensors") {
  SUBCASE("paper geometry: 100 sensors, factor 25") {
    const auto sched = make_rsp_schedule(100, 25, 7);
    CHECK(sched.period() == 25);
    std::set<int> all;
    for (const auto& s : sched.frame_sensors) {
      CHECK(s.size() == 4);
      all.insert(s.begin(), s.end());
    }
    CHECK(all.size() == 100);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 99);
  }
  SUBCASE("no sub-sampling") {
    const auto sched = make_rsp_schedule(4, 1, 1);
    CHECK(sched.period() == 1);
    CHECK(sched.sensors_for(0) == std::vector<int>{0, 1, 2, 3});
    CHECK(sched.sensors_for(17) == std::vector<int>{0, 1, 2, 3});
  }
  SUBCASE("seeded partition is disjoint and complete") {
    const auto sched = make_rsp_schedule(6, 3, 12345);
    std::set<int> all;
    std::size_t total = 0;
    for (const auto& s : sched.frame_sensors) {
      total += s.size();
      all.insert(s.begin(), s.end());
    }
    CHECK(total == 6);
    CHECK(all.size() == 6);
    // determinism
    const auto again = make_rsp_schedule(6, 3, 12345);
    CHECK(again.frame_sensors == sched.frame_sensors);
  }
  SUBCASE("indivisible count is rejected") {
    CHECK_THROWS_AS(make_rsp_schedule(10, 3, 0), std::invalid_argument);
  }
}

TEST_CASE("stacked period is a permutation of the identity") {
  const auto sched = make_rsp_schedule(24, 6, 99);
  std::vector<int> stacked;
  for (const auto& s : sched.frame_sensors)
    stacked.insert(stacked.end(), s.begin(), s.end());
  std::sort(stacked.begin(), stacked.end());
  std::vector<int> id(24);
  std::iota(id.begin(), id.end(), 0);
  CHECK(stacked == id);
}

TEST_CASE("apply_C and its adjoint") {
  const std::size_t m_tau = 5;
  const int m = 4;

  SUBCASE("full schedule is the identity") {
    const auto sched = make_full_schedule(m);
    const auto f = oracle::randn(m * m_tau, 3);
    const auto sub = apply_C(sched, 0, f, m_tau);
    CHECK(sub == f);
    const auto back = apply_C_adjoint(sched, 0, sub, m_tau);
    CHECK(back == f);
  }

  SUBCASE("single row selection") {
    SamplingSchedule sched;
    sched.total_sensors = 2;
    sched.frame_sensors = {{1}};
    std::vector<double> f = {1, 2, 3, 10, 20, 30};
    const auto sub = apply_C(sched, 0, f, 3);
    CHECK(sub == std::vector<double>{10, 20, 30});
    const auto back = apply_C_adjoint(sched, 0, sub, 3);
    CHECK(back == std::vector<double>{0, 0, 0, 10, 20, 30});
  }

  SUBCASE("adjoint inner-product identity") {
    const auto sched = make_rsp_schedule(m, 2, 5);
    for (int t = 0; t < 2; ++t) {
      const auto f = oracle::randn(m * m_tau, 10 + t);
      const auto g = oracle::randn(sched.rows_for(t) * m_tau, 20 + t);
      const auto cf = apply_C(sched, t, f, m_tau);
      const auto ctg = apply_C_adjoint(sched, t, g, m_tau);
      CHECK(oracle::dot(cf, g) == doctest::Approx(oracle::dot(f, ctg)).epsilon(1e-15));
    }
  }

  SUBCASE("C C^T is the identity on sub data") {
    const auto sched = make_rsp_schedule(6, 3, 1);
    const auto g = oracle::randn(2 * m_tau, 8);
    const auto full = apply_C_adjoint(sched, 1, g, m_tau);
    const auto back = apply_C(sched, 1, full, m_tau);
    CHECK(back == g);
  }

  SUBCASE("C^T C is an idempotent 0/1 diagonal") {
    const auto sched = make_rsp_schedule(6, 2, 2);
    const auto f = oracle::randn(6 * m_tau, 9);
    auto once = apply_C_adjoint(sched, 0, apply_C(sched, 0, f, m_tau), m_tau);
    auto twice = apply_C_adjoint(sched, 0, apply_C(sched, 0, once, m_tau), m_tau);
    CHECK(once == twice);
    for (std::size_t i = 0; i < once.size(); ++i)
      CHECK((once[i] == 0.0 || once[i] == f[i]));
  }
}

TEST_CASE("schedule json round trip") {
  const auto sched = make_rsp_schedule(12, 4, 77);
  const auto text = schedule_to_json(sched);
  const auto back = schedule_from_json(text);
  CHECK(back.total_sensors == sched.total_sensors);
  CHECK(back.frame_sensors == sched.frame_sensors);
}
