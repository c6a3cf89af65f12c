#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace egfc {

/// Class tag carried by a rule. The classifier treats labels as opaque.
using Label = int;
using RuleId = std::uint64_t;

/// Upper (Stigler) and lower dispersion limits of every membership function.
inline constexpr double kSigmaMax = 1.0 / (2.0 * std::numbers::pi);
inline constexpr double kSigmaMin = 1.0 / (4.0 * std::numbers::pi);

inline constexpr std::size_t kNeverDelete = std::numeric_limits<std::size_t>::max();

struct GaussianMF {
  double mu = 0.0;
  double sigma = kSigmaMax;
};

/// exp(-(x - mu)^2 / (2 sigma^2)). Throws std::logic_error if sigma <= 0.
double membership(const GaussianMF& mf, double x);

struct Rule {
  RuleId id = 0;
  std::vector<GaussianMF> mfs;
  std::optional<Label> label;
  std::size_t update_count = 1;
  std::size_t last_active = 0;

  std::size_t dim() const { return mfs.size(); }
};

/// Minimum T-norm over the per-attribute memberships.
double activation(const Rule& rule, std::span<const double> x);

/// Mean over attributes of |mu_a - mu_b| + (sqrt(sigma_a) - sqrt(sigma_b))^2.
double granule_distance(const Rule& a, const Rule& b);

struct Hyperparameters {
  double rho0 = 0.1;
  double merge_threshold = 0.1;
  // kNeverDelete keeps idle rules forever.
  std::size_t inactivity_horizon = 200;
  double rho_floor = 1e-4;

  void validate() const;
};

struct ClassEstimate {
  std::optional<Label> predicted;
  std::optional<RuleId> winning_rule;
  double activation = 0.0;
};

/// Evolving Gaussian fuzzy rule base trained one sample at a time from a
/// partially labeled stream.
///
/// Each rule is a granule built from n Gaussian membership functions and an
/// optional class. A sample that activates no rule above the rho-level
/// spawns a new granule; otherwise the most active compatible rule absorbs
/// it through recursive mean/dispersion updates. Unlabeled granules take the
/// class of the first labeled sample that activates them. After every
/// sample the rho-level tracks the mean dispersion, idle rules are dropped
/// and the closest compatible pair may be merged.
///
/// Single writer: learn() and the structural operations must not run
/// concurrently on one instance.
class RuleBase {
 public:
  explicit RuleBase(std::size_t dim, Hyperparameters params = {});

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  const std::vector<Rule>& rules() const { return rules_; }
  const Hyperparameters& params() const { return params_; }
  double rho() const { return rho_; }
  std::optional<double> prev_avg_sigma() const { return prev_avg_sigma_; }
  /// Index of the current stream sample (0 before the first learn()).
  std::size_t step() const { return step_; }

  const Rule* find(RuleId id) const;

  /// Prediction from the most active rule without changing state. Ties go
  /// to the lowest rule index.
  ClassEstimate classify(std::span<const double> x) const;

  /// One online iteration: estimate first, then adapt structure and
  /// parameters, then rho update, deletion and merging.
  ClassEstimate learn(std::span<const double> x, std::optional<Label> label);

  // Individual steps of learn(), exposed for inspection and testing.

  RuleId create_rule(std::span<const double> x, std::optional<Label> label);

  /// Most active rule above rho. For a labeled sample only rules whose class
  /// matches or is undefined qualify.
  std::optional<RuleId> select_rule(std::span<const double> x,
                                    std::optional<Label> label) const;

  /// Recursive mean/dispersion update of one rule. Throws
  /// std::invalid_argument for an unknown id.
  void update_rule(RuleId id, std::span<const double> x);

  /// Labels every unlabeled rule whose activation exceeds rho.
  std::size_t tag_active(std::span<const double> x, Label label);

  /// Rescales rho by the ratio of the current to the previous mean
  /// dispersion, clamped to (rho_floor, 1]. No-op on an empty base.
  void update_rho();

  std::size_t delete_inactive();

  /// Merges the closest pair of class-compatible rules if their distance is
  /// below the merge threshold. Returns the id of the merged rule.
  std::optional<RuleId> merge_closest();

  /// Advances the stream index without learning.
  void advance_step() { ++step_; }

  /// Replaces rho directly. Throws std::invalid_argument outside (0, 1].
  void set_rho(double rho);

  /// Restores a previously exported rule; used by snapshot import and
  /// tests. Throws on dimension mismatch or invalid dispersion.
  void insert_rule(Rule rule);

  double average_sigma() const;

 private:
  std::size_t index_of(RuleId id) const;
  std::vector<double> activations(std::span<const double> x) const;
  void check_dim(std::span<const double> x) const;
  void tag_unlabeled(std::span<const double> acts, Label label);
  std::optional<std::size_t> select_index(std::span<const double> acts,
                                          std::optional<Label> label) const;

  std::size_t dim_;
  Hyperparameters params_;
  std::vector<Rule> rules_;
  double rho_;
  std::optional<double> prev_avg_sigma_;
  std::size_t step_ = 0;
  RuleId next_id_ = 1;
};

/// Runs learn() over a sequence; labels[i] pairs with samples[i].
std::vector<ClassEstimate> learn_sequence(
    RuleBase& base, std::span<const std::vector<double>> samples,
    std::span<const std::optional<Label>> labels);

}  // namespace egfc
