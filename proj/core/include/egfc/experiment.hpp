#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "egfc/classifier.hpp"
#include "egfc/features.hpp"
#include "egfc/metrics.hpp"
#include "egfc/waveform.hpp"

namespace egfc {

/// Per-attribute gains applied to [x1 x2 x3 x4] before classification.
/// The classifier's dispersions live in [1/4pi, 1/2pi]; the RMS attribute
/// spans a much narrower range than the others and is amplified to match.
using AttributeGain = std::array<double, AttributeVector::kSize>;
inline constexpr AttributeGain kDefaultAttributeGain = {1.0, 1.0, 1.0, 20.0};

struct PipelineParams {
  Hyperparameters hyper;
  double lambda = kDefaultHpLambda;
  AttributeGain attribute_gain = kDefaultAttributeGain;
  std::size_t per_class = 2000;

  void validate() const;
};

/// One point of the (SNR x window length x labeled fraction) grid.
struct CellSpec {
  double snr_db = 20.0;
  std::size_t cycles = 4;
  double labeled_fraction = 1.0;

  /// Stable identifier, e.g. "snr20_cyc4_frac1.00".
  std::string id() const;
};

struct ExperimentPlan {
  std::vector<double> snr_list;
  std::vector<std::size_t> cycles_list;
  std::vector<double> labeled_fractions;
  std::vector<std::uint64_t> seeds;
  PipelineParams params;
  std::filesystem::path output_dir;  // empty: nothing is written
  std::size_t threads = 0;           // 0: hardware concurrency

  std::size_t runs() const { return seeds.size(); }
  std::vector<CellSpec> cells() const;
  void validate() const;
};

/// Attributes of a whole stream, extracted once and reusable across labeled
/// fractions (the label mask is applied by comparing mask draws).
struct FeatureStream {
  double snr_db = 0.0;
  std::size_t cycles = 0;
  std::uint64_t seed = 0;
  std::vector<AttributeVector> attributes;
  std::vector<int> truth;
  std::vector<double> mask_draws;
  double extraction_seconds = 0.0;
};

FeatureStream extract_stream(double snr_db, std::size_t cycles,
                             std::uint64_t seed, const PipelineParams& params);

struct TrajectoryPoint {
  std::size_t h = 0;
  double acc = 0.0;
  std::size_t rules = 0;
  double rho = 0.0;
};

struct RuleBaseSnapshot {
  std::vector<Rule> rules;
  double rho = 0.0;
  std::size_t step = 0;
};

RuleBaseSnapshot snapshot(const RuleBase& base);

struct RunRecord {
  CellSpec cell;
  std::uint64_t seed = 0;
  double acc = 0.0;
  double purity = 0.0;
  double c_avg = 0.0;
  std::size_t final_rules = 0;
  std::size_t labels_seen = 0;
  double wall_seconds = 0.0;
  ConfusionMatrix confusion{kNumClasses};
  std::vector<TrajectoryPoint> trajectory;
  RuleBaseSnapshot final_base;
};

/// Feeds a prepared stream through the classifier prequentially.
RunRecord run_stream(const FeatureStream& stream, double labeled_fraction,
                     const PipelineParams& params);

/// Generates, extracts and classifies one cell for one seed.
RunRecord run_cell(const CellSpec& cell, std::uint64_t seed,
                   const PipelineParams& params);

/// Aggregate of all seeds of one cell. Accuracy and purity are in percent.
struct ExperimentResult {
  CellSpec cell;
  std::size_t runs = 0;
  Interval acc;
  Interval purity;
  Interval rules;
  Interval time;
  ConfusionMatrix confusion{kNumClasses};
};

/// Throws std::invalid_argument on an empty set or mixed cells.
ExperimentResult aggregate(std::span<const RunRecord> runs,
                           double confidence = 0.99);

struct CellError {
  std::string cell_id;
  std::uint64_t seed = 0;
  std::string message;
};

struct PlanOutcome {
  std::vector<ExperimentResult> results;
  std::vector<RunRecord> runs;
  std::vector<CellError> errors;
};

/// Runs every cell for every seed. Streams sharing (SNR, cycles, seed) are
/// extracted once; independent streams run on a worker pool. Results are
/// folded serially in plan order, so output is independent of scheduling.
/// When output_dir is set, writes summary.csv, runs.csv and per-run
/// trajectory, confusion and rule-base files. Failures are reported per cell
/// and do not stop other cells.
PlanOutcome run_plan(const ExperimentPlan& plan);

/// Parses a JSON plan. Throws std::invalid_argument on schema errors.
ExperimentPlan parse_plan(std::string_view json_text);
ExperimentPlan load_plan(const std::filesystem::path& path);

}  // namespace egfc
