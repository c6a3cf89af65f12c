#include "egfc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace egfc {

double membership(const GaussianMF& mf, double x) {
  if (!(mf.sigma > 0.0))
    throw std::logic_error("membership: dispersion must be positive");
  const double z = (x - mf.mu) / mf.sigma;
  return std::exp(-0.5 * z * z);
}

double activation(const Rule& rule, std::span<const double> x) {
  if (x.size() != rule.dim())
    throw std::invalid_argument("activation: dimension mismatch");
  double act = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    act = std::min(act, membership(rule.mfs[j], x[j]));
  return act;
}

double granule_distance(const Rule& a, const Rule& b) {
  if (a.dim() != b.dim() || a.dim() == 0)
    throw std::invalid_argument("granule_distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const auto& p = a.mfs[j];
    const auto& q = b.mfs[j];
    sum += std::abs(p.mu - q.mu) + (p.sigma + q.sigma) -
           2.0 * std::sqrt(p.sigma * q.sigma);
  }
  // The dispersion term is a perfect square; drop rounding negatives.
  return std::max(0.0, sum / static_cast<double>(a.dim()));
}

void Hyperparameters::validate() const {
  if (!(rho0 > 0.0 && rho0 <= 1.0))
    throw std::invalid_argument("rho0 must lie in (0, 1]");
  if (!(merge_threshold >= 0.0))
    throw std::invalid_argument("merge threshold must be non-negative");
  if (!(rho_floor > 0.0 && rho_floor < 1.0))
    throw std::invalid_argument("rho floor must lie in (0, 1)");
  if (inactivity_horizon == 0)
    throw std::invalid_argument("inactivity horizon must be positive");
}

RuleBase::RuleBase(std::size_t dim, Hyperparameters params)
    : dim_(dim), params_(params), rho_(params.rho0) {
  if (dim == 0) throw std::invalid_argument("rule base needs dim >= 1");
  params_.validate();
}

const Rule* RuleBase::find(RuleId id) const {
  auto it = std::find_if(rules_.begin(), rules_.end(),
                         [id](const Rule& r) { return r.id == id; });
  return it == rules_.end() ? nullptr : &*it;
}

std::size_t RuleBase::index_of(RuleId id) const {
  for (std::size_t i = 0; i < rules_.size(); ++i)
    if (rules_[i].id == id) return i;
  throw std::invalid_argument("unknown rule id " + std::to_string(id));
}

void RuleBase::check_dim(std::span<const double> x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("sample dimension does not match rule base");
}

std::vector<double> RuleBase::activations(std::span<const double> x) const {
  std::vector<double> acts(rules_.size());
  for (std::size_t i = 0; i < rules_.size(); ++i)
    acts[i] = activation(rules_[i], x);
  return acts;
}

ClassEstimate RuleBase::classify(std::span<const double> x) const {
  check_dim(x);
  ClassEstimate est;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const double a = activation(rules_[i], x);
    if (!best || a > est.activation) {
      best = i;
      est.activation = a;
    }
  }
  if (best) {
    est.winning_rule = rules_[*best].id;
    est.predicted = rules_[*best].label;
  }
  return est;
}

RuleId RuleBase::create_rule(std::span<const double> x,
                             std::optional<Label> label) {
  check_dim(x);
  Rule r;
  r.id = next_id_++;
  r.mfs.reserve(dim_);
  for (double v : x) r.mfs.push_back({v, kSigmaMax});
  r.label = label;
  r.update_count = 1;
  r.last_active = step_;
  rules_.push_back(std::move(r));
  return rules_.back().id;
}

std::optional<std::size_t> RuleBase::select_index(
    std::span<const double> acts, std::optional<Label> label) const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (!(acts[i] > rho_)) continue;
    if (label && rules_[i].label && *rules_[i].label != *label) continue;
    if (!best || acts[i] > acts[*best]) best = i;
  }
  return best;
}

std::optional<RuleId> RuleBase::select_rule(std::span<const double> x,
                                            std::optional<Label> label) const {
  check_dim(x);
  const auto idx = select_index(activations(x), label);
  if (!idx) return std::nullopt;
  return rules_[*idx].id;
}

void RuleBase::update_rule(RuleId id, std::span<const double> x) {
  check_dim(x);
  Rule& r = rules_[index_of(id)];
  r.update_count += 1;
  const double w = static_cast<double>(r.update_count);
  for (std::size_t j = 0; j < dim_; ++j) {
    GaussianMF& mf = r.mfs[j];
    const double mu_old = mf.mu;
    const double dev = x[j] - mu_old;
    mf.mu = ((w - 1.0) * mu_old + x[j]) / w;
    const double s =
        std::sqrt((w - 1.0) / w * mf.sigma * mf.sigma + dev * dev / w);
    mf.sigma = std::clamp(s, kSigmaMin, kSigmaMax);
  }
  r.last_active = step_;
}

void RuleBase::tag_unlabeled(std::span<const double> acts, Label label) {
  for (std::size_t i = 0; i < rules_.size(); ++i)
    if (!rules_[i].label && acts[i] > rho_) rules_[i].label = label;
}

std::size_t RuleBase::tag_active(std::span<const double> x, Label label) {
  check_dim(x);
  const auto acts = activations(x);
  std::size_t tagged = 0;
  for (std::size_t i = 0; i < rules_.size(); ++i)
    if (!rules_[i].label && acts[i] > rho_) ++tagged;
  tag_unlabeled(acts, label);
  return tagged;
}

double RuleBase::average_sigma() const {
  if (rules_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rules_)
    for (const auto& mf : r.mfs) sum += mf.sigma;
  return sum / static_cast<double>(rules_.size() * dim_);
}

void RuleBase::update_rho() {
  if (rules_.empty()) return;
  const double avg = average_sigma();
  if (prev_avg_sigma_) {
    const double next = avg / *prev_avg_sigma_ * rho_;
    // Keep rho strictly above the floor.
    rho_ = std::clamp(next, std::nextafter(params_.rho_floor, 1.0), 1.0);
  }
  prev_avg_sigma_ = avg;
}

std::size_t RuleBase::delete_inactive() {
  if (params_.inactivity_horizon == kNeverDelete) return 0;
  const auto before = rules_.size();
  std::erase_if(rules_, [&](const Rule& r) {
    return step_ > r.last_active &&
           step_ - r.last_active > params_.inactivity_horizon;
  });
  return before - rules_.size();
}

std::optional<RuleId> RuleBase::merge_closest() {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  double best_d = 0.0;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    for (std::size_t j = i + 1; j < rules_.size(); ++j) {
      if (rules_[i].label != rules_[j].label) continue;
      const double d = granule_distance(rules_[i], rules_[j]);
      if (!best || d < best_d) {
        best = {i, j};
        best_d = d;
      }
    }
  }
  if (!best || !(best_d < params_.merge_threshold)) return std::nullopt;

  const auto [i, j] = *best;
  const Rule& a = rules_[i];
  const Rule& b = rules_[j];
  Rule m;
  m.id = next_id_++;
  m.label = a.label;
  m.update_count = a.update_count + b.update_count;
  m.last_active = std::max(a.last_active, b.last_active);
  m.mfs.resize(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    const double s1 = a.mfs[k].sigma;
    const double s2 = b.mfs[k].sigma;
    const double w1 = s1 / s2;
    const double w2 = s2 / s1;
    m.mfs[k].mu = (w1 * a.mfs[k].mu + w2 * b.mfs[k].mu) / (w1 + w2);
    m.mfs[k].sigma = std::min(s1 + s2, kSigmaMax);
  }
  rules_[i] = std::move(m);
  rules_.erase(rules_.begin() + static_cast<std::ptrdiff_t>(j));
  return rules_[i].id;
}

void RuleBase::set_rho(double rho) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("rho must lie in (0, 1]");
  rho_ = rho;
}

void RuleBase::insert_rule(Rule rule) {
  if (rule.dim() != dim_)
    throw std::invalid_argument("insert_rule: dimension mismatch");
  for (const auto& mf : rule.mfs)
    if (!(mf.sigma > 0.0))
      throw std::invalid_argument("insert_rule: dispersion must be positive");
  if (rule.update_count == 0)
    throw std::invalid_argument("insert_rule: update count must be >= 1");
  if (rule.id == 0 || find(rule.id))
    rule.id = next_id_;
  next_id_ = std::max(next_id_, rule.id + 1);
  rules_.push_back(std::move(rule));
}

ClassEstimate RuleBase::learn(std::span<const double> x,
                              std::optional<Label> label) {
  check_dim(x);
  ++step_;
  const auto acts = activations(x);

  ClassEstimate est;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (!est.winning_rule || acts[i] > est.activation) {
      est.winning_rule = rules_[i].id;
      est.predicted = rules_[i].label;
      est.activation = acts[i];
    }
  }

  const bool any_active =
      std::any_of(acts.begin(), acts.end(), [&](double a) { return a > rho_; });
  if (!any_active) {
    create_rule(x, label);
  } else if (const auto idx = select_index(acts, label)) {
    update_rule(rules_[*idx].id, x);
    if (label) tag_unlabeled(acts, *label);
  } else {
    // Every active rule carries a different class.
    create_rule(x, label);
  }

  update_rho();
  delete_inactive();
  merge_closest();
  return est;
}

std::vector<ClassEstimate> learn_sequence(
    RuleBase& base, std::span<const std::vector<double>> samples,
    std::span<const std::optional<Label>> labels) {
  if (samples.size() != labels.size())
    throw std::invalid_argument("learn_sequence: samples/labels size mismatch");
  std::vector<ClassEstimate> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    out.push_back(base.learn(samples[i], labels[i]));
  return out;
}

}  // namespace egfc
