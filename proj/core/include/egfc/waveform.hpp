#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace egfc {

/// Power-quality disturbance classes with stable integer codes.
enum class DisturbanceClass : int {
  kNone = 1,
  kSpike = 2,
  kNotching = 3,
  kHarmonics = 4,
  kTransient = 5,
};

inline constexpr int kNumClasses = 5;

constexpr int to_code(DisturbanceClass c) { return static_cast<int>(c); }

/// Throws std::invalid_argument for codes outside 1..5.
DisturbanceClass class_from_code(int code);

std::string_view class_name(DisturbanceClass c);

inline constexpr DisturbanceClass kAllClasses[] = {
    DisturbanceClass::kNone, DisturbanceClass::kSpike,
    DisturbanceClass::kNotching, DisturbanceClass::kHarmonics,
    DisturbanceClass::kTransient};

using Rng = std::mt19937_64;

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct SignalConfig {
  double fundamental_hz = 60.0;
  std::size_t samples_per_cycle = 256;
  std::size_t cycles_per_window = 4;
  // +inf disables noise.
  double snr_db = 20.0;
  // Amplitude of the fundamental in raw units (beta).
  double amplitude = 1.0;
  std::uint64_t rng_seed = 0;

  double sampling_hz() const {
    return fundamental_hz * static_cast<double>(samples_per_cycle);
  }
  std::size_t window_length() const {
    return cycles_per_window * samples_per_cycle;
  }
  /// Throws std::invalid_argument on a malformed configuration.
  void validate() const;
};

struct Waveform {
  std::vector<double> samples;
  DisturbanceClass label = DisturbanceClass::kNone;
  double phase = 0.0;
  std::uint64_t seed_used = 0;
};

/// Noise standard deviation that yields `snr_db` for a fundamental of
/// amplitude `beta`: sigma = beta / (sqrt(2) * 10^(snr/20)).
double noise_sigma(double beta, double snr_db);

/// Empirical SNR of a raw-unit noise residual, the inverse of noise_sigma.
double empirical_snr_db(double beta, const std::vector<double>& residual);

/// Builds one normalized window of the given class. Draw order is fixed:
/// phase, disturbance parameters, then per-sample noise (skipped when the
/// SNR is infinite), so a noiseless twin from the same seed is the clean
/// signal of a noisy window.
Waveform generate_window(const SignalConfig& config, DisturbanceClass cls,
                         Rng& rng);

/// Seeds a fresh generator from `seed` and records it in `seed_used`.
Waveform generate_window(const SignalConfig& config, DisturbanceClass cls,
                         std::uint64_t seed);

struct StreamSpec {
  std::size_t per_class = 2000;
  double labeled_fraction = 1.0;
  std::uint64_t rng_seed = 0;

  std::size_t total_windows() const { return per_class * kNumClasses; }
  void validate() const;
};

struct StreamItem {
  Waveform waveform;  // waveform.label is the ground truth
  std::optional<DisturbanceClass> visible_label;
  // Uniform [0, 1) draw; the label is visible iff mask_draw < fraction.
  double mask_draw = 0.0;
};

/// Lazily produces a class-balanced, randomly interleaved stream. The
/// class order, label mask and per-window seeds are fixed at construction,
/// so windows are synthesized on demand without holding the whole stream.
class StreamGenerator {
 public:
  StreamGenerator(const StreamSpec& spec, const SignalConfig& config);

  std::size_t size() const { return order_.size(); }
  std::size_t position() const { return next_; }
  bool done() const { return next_ >= order_.size(); }
  StreamItem next();

 private:
  SignalConfig config_;
  double fraction_;
  std::vector<DisturbanceClass> order_;
  std::vector<double> mask_draws_;
  std::vector<std::uint64_t> seeds_;
  std::size_t next_ = 0;
};

/// Eager form of StreamGenerator; intended for small streams.
std::vector<StreamItem> generate_stream(const StreamSpec& spec,
                                        const SignalConfig& config);

}  // namespace egfc
