#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "egfc/waveform.hpp"

namespace egfc {

inline constexpr double kDefaultHpLambda = 256000.0;

struct HPDecomposition {
  std::vector<double> trend;
  std::vector<double> cyclical;
  double lambda = 0.0;
};

/// Hodrick-Prescott smoother for a fixed series length and smoothing weight.
///
/// The trend solves (I + lambda * D'D) tau = y, where D is the
/// (T-2) x T second-difference operator. The system matrix is symmetric
/// positive definite and pentadiagonal; it is factored once as L D L' with
/// unit lower-triangular L of bandwidth 2, after which every solve is O(T).
class HpFilter {
 public:
  /// Throws std::invalid_argument if length < 3 or lambda < 0.
  HpFilter(std::size_t length, double lambda);

  std::size_t length() const { return diag_.size(); }
  double lambda() const { return lambda_; }

  HPDecomposition apply(std::span<const double> signal) const;

  /// Writes the trend into `trend` (resized to length()).
  void trend(std::span<const double> signal, std::vector<double>& trend) const;

 private:
  double lambda_;
  std::vector<double> diag_;  // D of L D L'
  std::vector<double> l1_;    // L(i+1, i)
  std::vector<double> l2_;    // L(i+2, i)
};

HPDecomposition hp_filter(std::span<const double> signal, double lambda);

/// Single-sided amplitude at DFT bin `freq_index`, with the DFT normalized
/// by 1/N. Non-DC bins are doubled; bin 0 is returned as |DFT(0)|.
/// `sampling_hz` fixes the bin frequency f_n = n * sampling_hz / N and must
/// be positive.
double dft_amplitude(std::span<const double> signal, std::size_t freq_index,
                     double sampling_hz);

/// Frequency in hertz of bin `freq_index` for an N-sample record.
double bin_frequency(std::size_t freq_index, std::size_t n, double sampling_hz);

double rms(std::span<const double> signal);

/// x1: fundamental amplitude of the raw window; x2, x3, x4: minimum,
/// maximum and RMS of the HP cyclical component.
struct AttributeVector {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;
  double x4 = 0.0;

  static constexpr std::size_t kSize = 4;
  std::array<double, kSize> values() const { return {x1, x2, x3, x4}; }
};

AttributeVector extract_attributes(const Waveform& window, double lambda,
                                   const SignalConfig& config);

/// Reusable extractor for a stream of equally sized windows; caches the HP
/// factorization and the fundamental-bin twiddles.
class AttributeExtractor {
 public:
  AttributeExtractor(const SignalConfig& config, double lambda);

  AttributeVector operator()(std::span<const double> window) const;
  const HpFilter& hp() const { return hp_; }

 private:
  std::size_t bin_;
  HpFilter hp_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

}  // namespace egfc
