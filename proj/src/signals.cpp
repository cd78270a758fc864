#include "fault_iso/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fault_iso {

Signal::Signal(int dim, std::size_t length)
    : samples_(Eigen::MatrixXd::Zero(dim, static_cast<Index>(length))) {
  if (dim < 1) throw std::invalid_argument("Signal: dim must be positive");
}

Signal::Signal(std::vector<double> scalar_samples)
    : samples_(1, static_cast<Index>(scalar_samples.size())) {
  for (std::size_t k = 0; k < scalar_samples.size(); ++k) {
    samples_(0, static_cast<Index>(k)) = scalar_samples[k];
  }
}

Signal::Signal(Eigen::MatrixXd samples) : samples_(std::move(samples)) {
  if (samples_.rows() < 1) throw std::invalid_argument("Signal: dim must be positive");
}

double Signal::operator()(Index k, int channel) const {
  if (k < 0) return 0.0;
  if (k >= samples_.cols()) {
    throw std::out_of_range("Signal: index " + std::to_string(k) + " past end");
  }
  return samples_(channel, k);
}

double& Signal::at(Index k, int channel) {
  if (k < 0 || k >= samples_.cols()) throw std::out_of_range("Signal::at");
  return samples_(channel, k);
}

Eigen::VectorXd Signal::sample(Index k) const {
  if (k < 0) return Eigen::VectorXd::Zero(samples_.rows());
  if (k >= samples_.cols()) throw std::out_of_range("Signal::sample");
  return samples_.col(k);
}

void Signal::set_sample(Index k, const Eigen::Ref<const Eigen::VectorXd>& value) {
  if (k < 0 || k >= samples_.cols()) throw std::out_of_range("Signal::set_sample");
  if (value.size() != samples_.rows()) throw std::invalid_argument("Signal::set_sample: dim");
  samples_.col(k) = value;
}

std::vector<double> Signal::channel(int c) const {
  std::vector<double> out(size());
  for (Index k = 0; k < samples_.cols(); ++k) out[static_cast<std::size_t>(k)] = samples_(c, k);
  return out;
}

namespace {

double padded(std::span<const double> x, Index i) {
  if (i < 0) return 0.0;
  if (i >= static_cast<Index>(x.size())) throw std::out_of_range("window past end of series");
  return x[static_cast<std::size_t>(i)];
}

}  // namespace

// Deviations are taken from the newest sample first, so a constant window has
// exactly zero spread and its own value as mean.
WindowStats window_stats(std::span<const double> x, Index k, Index n) {
  WindowStats s;
  s.length = std::max<Index>(n, 0);
  if (n <= 0) return s;
  const double pivot = padded(x, k);
  double shift = 0.0;
  for (Index i = 0; i < n; ++i) shift += padded(x, k - i) - pivot;
  shift /= static_cast<double>(n);
  s.mean = pivot + shift;
  double ss = 0.0;
  double sq = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double v = padded(x, k - i);
    const double c = (v - pivot) - shift;
    ss += c * c;
    sq += v * v;
    s.inf_norm = std::max(s.inf_norm, std::abs(v));
  }
  s.std = std::sqrt(std::max(ss / static_cast<double>(n), 0.0));
  s.two_norm = std::sqrt(sq);
  return s;
}

double window_mean(std::span<const double> x, Index k, Index n) {
  return window_stats(x, k, n).mean;
}

double window_std(std::span<const double> x, Index k, Index n) {
  return window_stats(x, k, n).std;
}

WindowStats stats_of(std::span<const double> window) {
  const auto n = static_cast<Index>(window.size());
  return window_stats(window, n - 1, n);
}

double window_mean(const Signal& x, Index k, Index n, int channel) {
  return window_mean(std::span<const double>(x.channel(channel)), k, n);
}

double window_std(const Signal& x, Index k, Index n, int channel) {
  return window_stats(x, k, n, channel).std;
}

std::pair<double, double> window_norms(const Signal& x, Index k, Index n, int channel) {
  const WindowStats s = window_stats(x, k, n, channel);
  return {s.two_norm, s.inf_norm};
}

WindowStats window_stats(const Signal& x, Index k, Index n, int channel) {
  const std::vector<double> c = x.channel(channel);
  return window_stats(std::span<const double>(c), k, n);
}

Signal gen_sine(double amplitude, double freq_hz, double sample_time, std::size_t length,
                double phase) {
  if (!(sample_time > 0.0)) throw std::invalid_argument("gen_sine: sample_time must be > 0");
  std::vector<double> u(length);
  for (std::size_t k = 0; k < length; ++k) {
    u[k] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(k) *
                                    sample_time +
                                phase);
  }
  return Signal(std::move(u));
}

Signal gen_piecewise(std::span<const Segment> segments, std::size_t length) {
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (segments[i].start <= segments[i - 1].start) {
      throw std::invalid_argument("gen_piecewise: segments overlap or are unsorted");
    }
  }
  std::vector<double> x(length, 0.0);
  // value of the active segment at index k, with its base level
  double base = 0.0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    const std::size_t stop = s + 1 < segments.size() ? segments[s + 1].start : length;
    const auto at = [&](std::size_t k) {
      return seg.mode == SegmentMode::kConst
                 ? seg.value
                 : base + seg.value * static_cast<double>(k - seg.start);
    };
    for (std::size_t k = seg.start; k < std::min(stop, length); ++k) x[k] = at(k);
    if (s + 1 < segments.size()) base = at(stop);
  }
  return Signal(std::move(x));
}

}  // namespace fault_iso
