#include "egfc/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace egfc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double twiddle_angle(std::size_t freq_index, std::size_t k, std::size_t n) {
  // Reduce n*k modulo N first so large products keep full precision.
  const auto r = static_cast<unsigned long long>(freq_index) * k % n;
  return kTwoPi * static_cast<double>(r) / static_cast<double>(n);
}

}  // namespace

HpFilter::HpFilter(std::size_t length, double lambda) : lambda_(lambda) {
  if (length < 3)
    throw std::invalid_argument("hp_filter: need at least 3 samples");
  if (!(lambda >= 0.0))
    throw std::invalid_argument("hp_filter: lambda must be non-negative");

  const std::size_t t = length;
  // Bands of I + lambda * D'D, accumulated row by row of D = [1 -2 1].
  std::vector<double> a(t, 0.0), b(t - 1, 0.0), c(t - 2, 0.0);
  for (std::size_t r = 0; r + 2 < t; ++r) {
    a[r] += 1.0;
    a[r + 1] += 4.0;
    a[r + 2] += 1.0;
    b[r] -= 2.0;
    b[r + 1] -= 2.0;
    c[r] += 1.0;
  }
  for (auto& v : a) v = 1.0 + lambda * v;
  for (auto& v : b) v *= lambda;
  for (auto& v : c) v *= lambda;

  diag_.assign(t, 0.0);
  l1_.assign(t - 1, 0.0);
  l2_.assign(t - 2, 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    double d = a[i];
    if (i >= 1) d -= l1_[i - 1] * l1_[i - 1] * diag_[i - 1];
    if (i >= 2) d -= l2_[i - 2] * l2_[i - 2] * diag_[i - 2];
    diag_[i] = d;
    if (i + 1 < t) {
      double off = b[i];
      if (i >= 1) off -= l2_[i - 1] * l1_[i - 1] * diag_[i - 1];
      l1_[i] = off / d;
    }
    if (i + 2 < t) l2_[i] = c[i] / d;
  }
}

void HpFilter::trend(std::span<const double> signal,
                     std::vector<double>& out) const {
  const std::size_t t = length();
  if (signal.size() != t)
    throw std::invalid_argument("hp_filter: signal length mismatch");
  out.assign(signal.begin(), signal.end());
  for (std::size_t i = 1; i < t; ++i) {
    out[i] -= l1_[i - 1] * out[i - 1];
    if (i >= 2) out[i] -= l2_[i - 2] * out[i - 2];
  }
  for (std::size_t i = 0; i < t; ++i) out[i] /= diag_[i];
  for (std::size_t i = t - 1; i-- > 0;) {
    out[i] -= l1_[i] * out[i + 1];
    if (i + 2 < t) out[i] -= l2_[i] * out[i + 2];
  }
}

HPDecomposition HpFilter::apply(std::span<const double> signal) const {
  HPDecomposition out;
  out.lambda = lambda_;
  trend(signal, out.trend);
  out.cyclical.resize(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i)
    out.cyclical[i] = signal[i] - out.trend[i];
  return out;
}

HPDecomposition hp_filter(std::span<const double> signal, double lambda) {
  return HpFilter(signal.size(), lambda).apply(signal);
}

double bin_frequency(std::size_t freq_index, std::size_t n, double sampling_hz) {
  return static_cast<double>(freq_index) * sampling_hz / static_cast<double>(n);
}

double dft_amplitude(std::span<const double> signal, std::size_t freq_index,
                     double sampling_hz) {
  const std::size_t n = signal.size();
  if (n < 2) throw std::invalid_argument("dft_amplitude: need >= 2 samples");
  if (freq_index >= n)
    throw std::invalid_argument("dft_amplitude: bin index out of range");
  if (!(sampling_hz > 0.0))
    throw std::invalid_argument("dft_amplitude: sampling rate must be positive");

  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = twiddle_angle(freq_index, k, n);
    re += signal[k] * std::cos(ang);
    im -= signal[k] * std::sin(ang);
  }
  const double mag = std::hypot(re, im) / static_cast<double>(n);
  return freq_index == 0 ? mag : 2.0 * mag;
}

double rms(std::span<const double> signal) {
  if (signal.empty()) throw std::invalid_argument("rms: empty signal");
  double ss = 0.0;
  for (double x : signal) ss += x * x;
  return std::sqrt(ss / static_cast<double>(signal.size()));
}

AttributeVector extract_attributes(const Waveform& window, double lambda,
                                   const SignalConfig& config) {
  return AttributeExtractor(config, lambda)(window.samples);
}

AttributeExtractor::AttributeExtractor(const SignalConfig& config,
                                       double lambda)
    : bin_(config.cycles_per_window),
      hp_(config.window_length(), lambda) {
  config.validate();
  const std::size_t n = config.window_length();
  cos_.resize(n);
  sin_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang = twiddle_angle(bin_, k, n);
    cos_[k] = std::cos(ang);
    sin_[k] = std::sin(ang);
  }
}

AttributeVector AttributeExtractor::operator()(
    std::span<const double> window) const {
  const std::size_t n = cos_.size();
  if (window.size() != n)
    throw std::invalid_argument("extract_attributes: window length mismatch");

  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    re += window[k] * cos_[k];
    im -= window[k] * sin_[k];
  }

  std::vector<double> cyc;
  hp_.trend(window, cyc);
  for (std::size_t i = 0; i < n; ++i) cyc[i] = window[i] - cyc[i];
  const auto [lo, hi] = std::minmax_element(cyc.begin(), cyc.end());

  AttributeVector x;
  x.x1 = 2.0 * std::hypot(re, im) / static_cast<double>(n);
  x.x2 = *lo;
  x.x3 = *hi;
  x.x4 = rms(cyc);
  return x;
}

}  // namespace egfc
