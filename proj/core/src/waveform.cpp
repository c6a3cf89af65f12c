#include "egfc/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace egfc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Spike landmarks, in samples from its start.
constexpr std::size_t kSpikeRise = 10;
constexpr std::size_t kSpikeLength = 20;

constexpr std::size_t kNotchLength = 9;
constexpr std::size_t kNotchGap = 23;
constexpr std::size_t kNotchPeriod = kNotchLength + kNotchGap;
constexpr std::size_t kNotchStartMin = 10;
constexpr std::size_t kNotchStartMax = 40;

struct HarmonicBand {
  int order;
  double lo;
  double hi;
};
constexpr HarmonicBand kHarmonicBands[] = {
    {2, 0.008, 0.016}, {3, 0.02, 0.04},   {4, 0.005, 0.01},
    {5, 0.023, 0.046}, {6, 0.003, 0.006}, {7, 0.02, 0.04},
};

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Magnitude in [lo, hi] with a uniformly drawn sign.
double signed_magnitude(Rng& rng, double lo, double hi) {
  const bool negative = std::bernoulli_distribution(0.5)(rng);
  const double m = uniform(rng, lo, hi);
  return negative ? -m : m;
}

void add_spikes(std::vector<double>& v, const SignalConfig& cfg, Rng& rng) {
  // The whole pulse stays inside its cycle.
  const std::size_t start =
      uniform_index(rng, 0, cfg.samples_per_cycle - 1 - kSpikeLength);
  const double peak = signed_magnitude(rng, 1.0, 1.5) * cfg.amplitude;
  for (std::size_t c = 0; c < cfg.cycles_per_window; ++c) {
    const std::size_t s = start + c * cfg.samples_per_cycle;
    for (std::size_t k = 0; k <= kSpikeLength; ++k) {
      const double shape =
          k <= kSpikeRise
              ? static_cast<double>(k) / kSpikeRise
              : static_cast<double>(kSpikeLength - k) /
                    static_cast<double>(kSpikeLength - kSpikeRise);
      v[s + k] += peak * shape;
    }
  }
}

void add_notches(std::vector<double>& v, const SignalConfig& cfg, Rng& rng) {
  const std::size_t start = uniform_index(rng, kNotchStartMin, kNotchStartMax);
  const double depth = signed_magnitude(rng, 0.05, 0.5) * cfg.amplitude;
  // Phase-locked train: every index congruent to `start` begins a notch.
  for (std::size_t s = start % kNotchPeriod; s < v.size(); s += kNotchPeriod) {
    const std::size_t end = std::min(v.size(), s + kNotchLength);
    for (std::size_t i = s; i < end; ++i) v[i] += depth;
  }
}

void add_harmonics(std::vector<double>& v, const SignalConfig& cfg, Rng& rng) {
  const double w = kTwoPi * cfg.fundamental_hz / cfg.sampling_hz();
  for (const auto& band : kHarmonicBands) {
    const double a = uniform(rng, band.lo, band.hi) * cfg.amplitude;
    const double phi = uniform(rng, -std::numbers::pi, std::numbers::pi);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] += a * std::sin(band.order * w * static_cast<double>(i) + phi);
  }
}

void add_transient(std::vector<double>& v, const SignalConfig& cfg, Rng& rng) {
  const std::size_t start = uniform_index(rng, 0, v.size() - 1);
  const double a = uniform(rng, 0.45, 1.0) * cfg.amplitude;
  const double freq = uniform(rng, 1000.0, 2500.0);
  const double damping = uniform(rng, 400.0, 1000.0);
  const double dt = 1.0 / cfg.sampling_hz();
  for (std::size_t i = start; i < v.size(); ++i) {
    const double t = static_cast<double>(i - start) * dt;
    v[i] += a * std::exp(-damping * t) * std::sin(kTwoPi * freq * t);
  }
}

}  // namespace

DisturbanceClass class_from_code(int code) {
  if (code < 1 || code > kNumClasses)
    throw std::invalid_argument("class code out of range: " +
                                std::to_string(code));
  return static_cast<DisturbanceClass>(code);
}

std::string_view class_name(DisturbanceClass c) {
  switch (c) {
    case DisturbanceClass::kNone: return "none";
    case DisturbanceClass::kSpike: return "spike";
    case DisturbanceClass::kNotching: return "notching";
    case DisturbanceClass::kHarmonics: return "harmonics";
    case DisturbanceClass::kTransient: return "transient";
  }
  return "unknown";
}

void SignalConfig::validate() const {
  if (!(fundamental_hz > 0.0))
    throw std::invalid_argument("fundamental frequency must be positive");
  if (samples_per_cycle < 2)
    throw std::invalid_argument("need at least 2 samples per cycle");
  if (cycles_per_window == 0)
    throw std::invalid_argument("window must hold at least one cycle");
  if (!(amplitude > 0.0))
    throw std::invalid_argument("fundamental amplitude must be positive");
  if (std::isnan(snr_db)) throw std::invalid_argument("SNR is NaN");
  // Notch train and spike landmarks assume room inside one cycle.
  if (samples_per_cycle <= kNotchStartMax || samples_per_cycle <= kSpikeLength)
    throw std::invalid_argument("samples per cycle too small for recipes");
}

double noise_sigma(double beta, double snr_db) {
  if (!(beta > 0.0))
    throw std::invalid_argument("noise_sigma: beta must be positive");
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  return beta / (std::numbers::sqrt2 * std::pow(10.0, snr_db / 20.0));
}

double empirical_snr_db(double beta, const std::vector<double>& residual) {
  if (residual.size() < 2)
    throw std::invalid_argument("empirical_snr_db: need >= 2 samples");
  const double n = static_cast<double>(residual.size());
  const double mean = std::accumulate(residual.begin(), residual.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : residual) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return 20.0 * std::log10(beta / (std::numbers::sqrt2 * sd));
}

Waveform generate_window(const SignalConfig& config, DisturbanceClass cls,
                         Rng& rng) {
  config.validate();
  const std::size_t n = config.window_length();
  const double w = kTwoPi * config.fundamental_hz / config.sampling_hz();

  Waveform out;
  out.label = cls;
  out.phase = uniform(rng, -std::numbers::pi, std::numbers::pi);

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = config.amplitude * std::sin(w * static_cast<double>(i) + out.phase);

  switch (cls) {
    case DisturbanceClass::kNone: break;
    case DisturbanceClass::kSpike: add_spikes(v, config, rng); break;
    case DisturbanceClass::kNotching: add_notches(v, config, rng); break;
    case DisturbanceClass::kHarmonics: add_harmonics(v, config, rng); break;
    case DisturbanceClass::kTransient: add_transient(v, config, rng); break;
  }

  const double sigma = noise_sigma(config.amplitude, config.snr_db);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& x : v) x += noise(rng);
  }

  // Fundamental peak maps to 1 and valley to 0.
  for (double& x : v) x = (x / config.amplitude + 1.0) / 2.0;
  out.samples = std::move(v);
  return out;
}

Waveform generate_window(const SignalConfig& config, DisturbanceClass cls,
                         std::uint64_t seed) {
  Rng rng(seed);
  Waveform out = generate_window(config, cls, rng);
  out.seed_used = seed;
  return out;
}

void StreamSpec::validate() const {
  if (per_class == 0) throw std::invalid_argument("per_class must be > 0");
  if (!(labeled_fraction >= 0.0 && labeled_fraction <= 1.0))
    throw std::invalid_argument("labeled_fraction must lie in [0, 1]");
}

StreamGenerator::StreamGenerator(const StreamSpec& spec,
                                 const SignalConfig& config)
    : config_(config), fraction_(spec.labeled_fraction) {
  spec.validate();
  config.validate();
  Rng rng(spec.rng_seed);
  order_.reserve(spec.total_windows());
  for (DisturbanceClass c : kAllClasses)
    order_.insert(order_.end(), spec.per_class, c);
  std::shuffle(order_.begin(), order_.end(), rng);

  // One uniform draw per window decides visibility, so streams that differ
  // only in labeled_fraction share every waveform and nest their masks.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  mask_draws_.resize(order_.size());
  seeds_.resize(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    mask_draws_[i] = unit(rng);
    seeds_[i] = rng();
  }
}

StreamItem StreamGenerator::next() {
  if (done()) throw std::out_of_range("stream exhausted");
  const std::size_t i = next_++;
  StreamItem item;
  item.waveform = generate_window(config_, order_[i], seeds_[i]);
  item.mask_draw = mask_draws_[i];
  if (mask_draws_[i] < fraction_) item.visible_label = order_[i];
  return item;
}

std::vector<StreamItem> generate_stream(const StreamSpec& spec,
                                        const SignalConfig& config) {
  StreamGenerator gen(spec, config);
  std::vector<StreamItem> out;
  out.reserve(gen.size());
  while (!gen.done()) out.push_back(gen.next());
  return out;
}

}  // namespace egfc
