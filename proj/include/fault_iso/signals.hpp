#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fault_iso {

using Index = std::ptrdiff_t;

/// Sampled signal x(k), k = 0..size()-1, each sample a vector of length dim().
/// Negative indices read as zero.
class Signal {
 public:
  Signal() = default;
  Signal(int dim, std::size_t length);
  explicit Signal(std::vector<double> scalar_samples);
  explicit Signal(Eigen::MatrixXd samples);  // dim x length

  int dim() const { return static_cast<int>(samples_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(samples_.cols()); }

  /// Channel value at k; 0 for k < 0. Throws std::out_of_range past the end.
  double operator()(Index k, int channel = 0) const;
  double& at(Index k, int channel = 0);
  Eigen::VectorXd sample(Index k) const;
  void set_sample(Index k, const Eigen::Ref<const Eigen::VectorXd>& value);

  /// Contiguous copy of one channel.
  std::vector<double> channel(int c = 0) const;
  const Eigen::MatrixXd& matrix() const { return samples_; }

 private:
  Eigen::MatrixXd samples_;
};

struct WindowStats {
  double mean = 0.0;
  double std = 0.0;
  double two_norm = 0.0;
  double inf_norm = 0.0;
  Index length = 0;
};

// Window primitives over a raw series. The window is x(k-n+1..k) with zero
// padding for negative indices; n == 0 gives an empty window (all zeros).
double window_mean(std::span<const double> x, Index k, Index n);
double window_std(std::span<const double> x, Index k, Index n);
WindowStats window_stats(std::span<const double> x, Index k, Index n);

/// Statistics of a whole buffer (the buffer is the window).
WindowStats stats_of(std::span<const double> window);

double window_mean(const Signal& x, Index k, Index n, int channel = 0);
double window_std(const Signal& x, Index k, Index n, int channel = 0);
/// (two_norm, inf_norm) of [x(k), ..., x(k-n+1)].
std::pair<double, double> window_norms(const Signal& x, Index k, Index n, int channel = 0);
WindowStats window_stats(const Signal& x, Index k, Index n, int channel = 0);

/// u(k) = amplitude * sin(2 pi freq_hz k sample_time).
Signal gen_sine(double amplitude, double freq_hz, double sample_time, std::size_t length,
                double phase = 0.0);

enum class SegmentMode { kConst, kRamp };

/// Piecewise segment starting at `start`. For kConst `value` is the level,
/// for kRamp it is the slope per step.
struct Segment {
  std::size_t start = 0;
  SegmentMode mode = SegmentMode::kConst;
  double value = 0.0;
};

/// Samples before the first segment are zero. A ramp starts from the value the
/// preceding segment would take at the ramp's start index.
Signal gen_piecewise(std::span<const Segment> segments, std::size_t length);

}  // namespace fault_iso
