#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace egfc {

/// Prequential running mean: m_h = ((h-1)/h) m_{h-1} + x_h / h.
class RecursiveMean {
 public:
  void push(double x);
  double value() const { return value_; }
  std::size_t count() const { return count_; }

 private:
  double value_ = 0.0;
  std::size_t count_ = 0;
};

/// Rows are true classes 1..K, columns predicted classes 1..K plus a final
/// "unknown" column.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  /// Throws std::invalid_argument if truth or prediction is out of range.
  void add(std::optional<int> predicted, int truth, std::uint64_t count = 1);
  void merge(const ConfusionMatrix& other);

  int num_classes() const { return k_; }
  std::size_t columns() const { return static_cast<std::size_t>(k_) + 1; }
  /// `predicted` 0 addresses the unknown column.
  std::uint64_t at(int truth, int predicted) const;
  std::uint64_t unknown(int truth) const { return at(truth, 0); }
  std::uint64_t row_total(int truth) const;
  std::uint64_t total() const;
  std::uint64_t correct() const;

 private:
  std::size_t col(int predicted) const;
  int k_;
  std::vector<std::uint64_t> cells_;
};

struct StreamScore {
  explicit StreamScore(int num_classes) : confusion(num_classes) {}

  /// Scores one prequential estimate; an absent prediction counts as wrong.
  void update_accuracy(std::optional<int> predicted, int truth);
  void update_cavg(std::size_t rules_now);

  double acc() const { return accuracy.value(); }
  double c_avg() const { return rules.value(); }
  std::size_t h() const { return accuracy.count(); }

  RecursiveMean accuracy;
  RecursiveMean rules;
  ConfusionMatrix confusion;
};

struct Assignment {
  std::optional<std::uint64_t> rule;  // winning rule at estimation time
  int truth = 0;
};

/// Cluster purity: each rule is mapped to its majority truth class over the
/// run (ties to the lower class) and the fraction of samples whose rule maps
/// to their own class is returned. Samples without a rule count as misses.
/// Throws std::invalid_argument on empty input.
double purity_score(std::span<const Assignment> assignments);

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Student-t confidence interval of the mean; half width is 0 for a single
/// sample. Throws std::invalid_argument on empty input or a confidence level
/// outside (0, 1).
Interval t_interval(std::span<const double> values, double confidence = 0.99);

}  // namespace egfc
