#include "egfc/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace egfc {

void RecursiveMean::push(double x) {
  ++count_;
  const double h = static_cast<double>(count_);
  value_ = (h - 1.0) / h * value_ + x / h;
}

ConfusionMatrix::ConfusionMatrix(int num_classes) : k_(num_classes) {
  if (num_classes < 1)
    throw std::invalid_argument("confusion matrix needs >= 1 class");
  cells_.assign(static_cast<std::size_t>(k_) * columns(), 0);
}

std::size_t ConfusionMatrix::col(int predicted) const {
  if (predicted < 0 || predicted > k_)
    throw std::invalid_argument("predicted class out of range");
  return predicted == 0 ? static_cast<std::size_t>(k_)
                        : static_cast<std::size_t>(predicted - 1);
}

void ConfusionMatrix::add(std::optional<int> predicted, int truth,
                          std::uint64_t count) {
  if (truth < 1 || truth > k_)
    throw std::invalid_argument("true class out of range");
  if (predicted && *predicted == 0)
    throw std::invalid_argument("predicted class out of range");
  const auto row = static_cast<std::size_t>(truth - 1);
  cells_[row * columns() + col(predicted.value_or(0))] += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw std::invalid_argument("confusion size mismatch");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
}

std::uint64_t ConfusionMatrix::at(int truth, int predicted) const {
  if (truth < 1 || truth > k_)
    throw std::invalid_argument("true class out of range");
  return cells_[static_cast<std::size_t>(truth - 1) * columns() +
                col(predicted)];
}

std::uint64_t ConfusionMatrix::row_total(int truth) const {
  std::uint64_t sum = 0;
  for (int p = 0; p <= k_; ++p) sum += at(truth, p);
  return sum;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::correct() const {
  std::uint64_t sum = 0;
  for (int c = 1; c <= k_; ++c) sum += at(c, c);
  return sum;
}

void StreamScore::update_accuracy(std::optional<int> predicted, int truth) {
  confusion.add(predicted, truth);
  accuracy.push(predicted && *predicted == truth ? 1.0 : 0.0);
}

void StreamScore::update_cavg(std::size_t rules_now) {
  rules.push(static_cast<double>(rules_now));
}

double purity_score(std::span<const Assignment> assignments) {
  if (assignments.empty())
    throw std::invalid_argument("purity_score: no assignments");
  std::map<std::uint64_t, std::map<int, std::size_t>> counts;
  for (const auto& a : assignments)
    if (a.rule) ++counts[*a.rule][a.truth];

  std::size_t hits = 0;
  for (const auto& [rule, per_class] : counts) {
    std::size_t best = 0;
    for (const auto& [cls, n] : per_class) best = std::max(best, n);
    hits += best;
  }
  return static_cast<double>(hits) / static_cast<double>(assignments.size());
}

Interval t_interval(std::span<const double> values, double confidence) {
  if (values.empty()) throw std::invalid_argument("t_interval: no values");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("t_interval: confidence must lie in (0, 1)");
  const double n = static_cast<double>(values.size());
  Interval out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.min = *lo;
  out.max = *hi;
  out.mean = std::clamp(out.mean, out.min, out.max);
  if (values.size() < 2) return out;

  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  out.half_width = t * sd / std::sqrt(n);
  return out;
}

}  // namespace egfc
