#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dynpat {

/// Records (elapsed seconds, label, energy) triples for convergence plots.
/// Timestamps are measured from construction and are nondecreasing.
class EnergyTrace {
public:
  struct Record {
    double seconds;
    std::string label;
    double energy;
  };

  EnergyTrace() : start_(std::chrono::steady_clock::now()) {}

  void add(std::string label, double energy) {
    const auto now = std::chrono::steady_clock::now();
    double sec = std::chrono::duration<double>(now - start_).count();
    if (!records_.empty() && sec < records_.back().seconds)
      sec = records_.back().seconds;
    records_.push_back({sec, std::move(label), energy});
  }

  /// Appends another trace, shifting its timestamps to keep monotonicity.
  void append(const EnergyTrace& other) {
    const double base = records_.empty() ? 0.0 : records_.back().seconds;
    for (const auto& r : other.records_)
      records_.push_back({base + r.seconds, r.label, r.energy});
  }

  const std::vector<Record>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  void clear() { records_.clear(); }

private:
  std::chrono::steady_clock::time_point start_;
  std::vector<Record> records_;
};

/// Thrown when an iterative solver diverges or an inner solve breaks down.
/// Carries the energy trace accumulated up to the failure.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& msg, EnergyTrace trace = {})
      : std::runtime_error(msg), trace_(std::move(trace)) {}

  const EnergyTrace& trace() const { return trace_; }

private:
  EnergyTrace trace_;
};

/// Uniform 2D computational grid with acoustic time stepping parameters and
/// the absorbing-boundary configuration of the wave propagator.
struct Grid2D {
  int nx = 0;                 ///< pixels along x
  int ny = 0;                 ///< pixels along y
  double dx = 0.0;            ///< pixel pitch [m]
  double c = 0.0;             ///< sound speed [m/s]
  int n_tau = 0;              ///< acoustic time steps recorded
  double d_tau = 0.0;         ///< acoustic time step [s]
  int damping_width = 0;      ///< absorbing band width [px]
  double damping_coeff = 0.0; ///< peak band absorption in units of c/dx

  Grid2D(int nx_, int ny_, double dx_, double c_, int n_tau_, double d_tau_,
         int damping_width_ = 0, double damping_coeff_ = 0.0)
      : nx(nx_), ny(ny_), dx(dx_), c(c_), n_tau(n_tau_), d_tau(d_tau_),
        damping_width(damping_width_), damping_coeff(damping_coeff_) {
    if (nx < 1 || ny < 1 || n_tau < 1)
      throw std::invalid_argument("Grid2D: nx, ny, n_tau must be >= 1");
    if (dx <= 0.0 || c <= 0.0 || d_tau <= 0.0)
      throw std::invalid_argument("Grid2D: dx, c, d_tau must be > 0");
    if (cfl() > 1.0 + 1e-12)
      throw std::invalid_argument("Grid2D: CFL number c*d_tau/dx exceeds 1");
    if (damping_width < 0 || 4 * damping_width >= std::min(nx, ny))
      throw std::invalid_argument(
          "Grid2D: damping_width must satisfy 0 <= w < min(nx,ny)/4");
    if (damping_coeff < 0.0)
      throw std::invalid_argument("Grid2D: damping_coeff must be >= 0");
  }

  int pixels() const { return nx * ny; }
  double cfl() const { return c * d_tau / dx; }
};

/// Dynamic image: T frames of nx*ny pixels, frame-major storage
/// (frame t occupies one contiguous block).
class ImageSeq {
public:
  ImageSeq() = default;
  ImageSeq(int nx, int ny, int frames)
      : nx_(nx), ny_(ny), frames_(frames),
        values_(static_cast<std::size_t>(nx) * ny * frames, 0.0) {
    if (nx < 1 || ny < 1 || frames < 1)
      throw std::invalid_argument("ImageSeq: nonpositive shape");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int frames() const { return frames_; }
  int pixels() const { return nx_ * ny_; }

  std::span<double> frame(int t) {
    return {values_.data() + static_cast<std::size_t>(t) * pixels(),
            static_cast<std::size_t>(pixels())};
  }
  std::span<const double> frame(int t) const {
    return {values_.data() + static_cast<std::size_t>(t) * pixels(),
            static_cast<std::size_t>(pixels())};
  }

  double& at(int x, int y, int t) {
    return values_[static_cast<std::size_t>(t) * pixels() + y * nx_ + x];
  }
  double at(int x, int y, int t) const {
    return values_[static_cast<std::size_t>(t) * pixels() + y * nx_ + x];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const ImageSeq& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && frames_ == o.frames_;
  }

private:
  int nx_ = 0, ny_ = 0, frames_ = 0;
  std::vector<double> values_;
};

/// Dynamic 2D motion field: per frame, component-major blocks [vx; vy] of
/// nx*ny each. The final frame is pinned to zero by convention (no motion
/// out of the last frame) and solvers never touch it.
class MotionSeq {
public:
  static constexpr int kDim = 2;

  MotionSeq() = default;
  MotionSeq(int nx, int ny, int frames)
      : nx_(nx), ny_(ny), frames_(frames),
        values_(static_cast<std::size_t>(kDim) * nx * ny * frames, 0.0) {
    if (nx < 1 || ny < 1 || frames < 1)
      throw std::invalid_argument("MotionSeq: nonpositive shape");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int frames() const { return frames_; }
  int pixels() const { return nx_ * ny_; }

  std::span<double> component(int t, int i) {
    return {values_.data() + offset(t, i), static_cast<std::size_t>(pixels())};
  }
  std::span<const double> component(int t, int i) const {
    return {values_.data() + offset(t, i), static_cast<std::size_t>(pixels())};
  }

  /// Both components of frame t as one contiguous block of 2*pixels().
  std::span<double> frame(int t) {
    return {values_.data() + offset(t, 0),
            static_cast<std::size_t>(kDim) * pixels()};
  }
  std::span<const double> frame(int t) const {
    return {values_.data() + offset(t, 0),
            static_cast<std::size_t>(kDim) * pixels()};
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const MotionSeq& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && frames_ == o.frames_;
  }

private:
  std::size_t offset(int t, int i) const {
    return (static_cast<std::size_t>(t) * kDim + i) * pixels();
  }

  int nx_ = 0, ny_ = 0, frames_ = 0;
  std::vector<double> values_;
};

/// Sub-sampled sensor data: one block per frame, rows are the selected
/// sensor channels of that frame, columns the m_tau acoustic time samples.
struct DataSeq {
  std::size_t m_tau = 0;
  double sigma = 0.0; ///< noise standard deviation used in simulation
  std::vector<std::vector<double>> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int rows(int t) const {
    return m_tau == 0 ? 0 : static_cast<int>(frames[t].size() / m_tau);
  }
};

/// Regularization weights of the joint reconstruction model plus the outer
/// step size eta. The *_tilde accessors give the step-scaled weights used
/// inside the proximal (denoising) subproblem.
struct RegParams {
  double alpha = 0.0; ///< image TV weight
  double beta = 0.0;  ///< motion TV weight
  double gamma = 0.0; ///< optical-flow misfit weight
  double eta = 1.0;   ///< outer step size

  RegParams() = default;
  RegParams(double a, double b, double g, double e = 1.0)
      : alpha(a), beta(b), gamma(g), eta(e) {
    validate();
  }

  void validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0)
      throw std::invalid_argument("RegParams: weights must be >= 0");
    if (!(eta > 0))
      throw std::invalid_argument("RegParams: eta must be > 0");
  }

  double alpha_tilde() const { return eta * alpha; }
  double beta_tilde() const { return eta * beta; }
  double gamma_tilde() const { return eta * gamma; }
};

} // namespace dynpat
