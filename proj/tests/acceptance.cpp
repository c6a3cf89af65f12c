// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <Eigen/Sparse>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "egfc/experiment.hpp"
#include "invariants.hpp"
#include "oracles.hpp"

using namespace egfc;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Dense system assembled from an explicit sparse D, then factored densely.
class DenseHpFromSparse {
 public:
  DenseHpFromSparse(std::size_t t, double lambda) {
    const auto n = static_cast<Eigen::Index>(t);
    Eigen::SparseMatrix<double> d(n - 2, n);
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index r = 0; r < n - 2; ++r) {
      trip.emplace_back(r, r, 1.0);
      trip.emplace_back(r, r + 1, -2.0);
      trip.emplace_back(r, r + 2, 1.0);
    }
    d.setFromTriplets(trip.begin(), trip.end());
    const Eigen::SparseMatrix<double> dtd = d.transpose() * d;
    Eigen::MatrixXd a = lambda * Eigen::MatrixXd(dtd);
    a.diagonal().array() += 1.0;
    lu_.compute(a);
  }
  std::vector<double> trend(const std::vector<double>& y) const {
    const Eigen::Map<const Eigen::VectorXd> b(y.data(),
                                              static_cast<Eigen::Index>(y.size()));
    const Eigen::VectorXd x = lu_.solve(b);
    return {x.data(), x.data() + x.size()};
  }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

Verdict hp_oracle() {
  Verdict v;
  const std::size_t lengths[] = {16, 256, 1024, 2560};
  const double lambdas[] = {0.0, 1600.0, 256000.0};
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  double banded_seconds = 0.0;
  int signals = 0;
  for (std::size_t li = 0; li < 4; ++li) {
    for (std::size_t ki = 0; ki < 3; ++ki) {
      const std::size_t t = lengths[li];
      const double lambda = lambdas[ki];
      const DenseHpFromSparse dense(t, lambda);
      // 100 signals over the 12 combinations.
      const int count = (li * 3 + ki) < 4 ? 9 : 8;
      for (int s = 0; s < count; ++s, ++signals) {
        const auto y = oracle::random_signal(rng, t);
        const auto t0 = Clock::now();
        const auto d = hp_filter(y, lambda);
        banded_seconds += since(t0);
        const auto ref = dense.trend(y);
        for (std::size_t i = 0; i < t; ++i)
          worst = std::max(worst, std::abs(d.trend[i] - ref[i]));
      }
    }
  }
  v.require(signals == 100, "signal count");
  v.require(worst < 1e-8, "max error " + fmt("%.3g", worst));
  v.require(banded_seconds < 10.0, "runtime " + fmt("%.3g s", banded_seconds));
  v.detail = std::to_string(signals) + " signals, max |diff| " + fmt("%.2e", worst) +
             ", banded time " + fmt("%.3f s", banded_seconds);
  return v;
}

Verdict dft_oracle() {
  Verdict v;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> len(2, 4096);
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    const std::size_t n = s == 0 ? 4096 : len(rng);
    const auto y = oracle::random_signal(rng, n);
    std::uniform_int_distribution<std::size_t> bin(0, n - 1);
    for (int k = 0; k < 6; ++k) {
      const std::size_t b = k == 0 ? 0 : bin(rng);
      worst = std::max(worst, std::abs(dft_amplitude(y, b, 15360.0) -
                                       oracle::naive_amplitude(y, b)));
    }
  }
  std::vector<double> sine(1024);
  for (std::size_t k = 0; k < sine.size(); ++k)
    sine[k] = 0.8 * std::sin(2.0 * std::numbers::pi * 60.0 * k / 15360.0);
  const double amp = dft_amplitude(sine, 4, 15360.0);
  v.require(worst < 1e-9, "max error " + fmt("%.3g", worst));
  v.require(std::abs(amp - 0.8) < 1e-9, "sine amplitude " + fmt("%.12f", amp));
  v.detail = "50 signals, max |diff| " + fmt("%.2e", worst) + ", sine 0.8 -> " +
             fmt("%.12f", amp);
  return v;
}

Rule rule1(double mu, double sigma, std::optional<Label> label = std::nullopt) {
  Rule r;
  r.mfs = {{mu, sigma}};
  r.label = label;
  return r;
}

Verdict classifier_algebra() {
  Verdict v;
  auto near = [&](double got, double want, double tol, const std::string& what) {
    v.require(std::abs(got - want) <= tol,
              what + " got " + fmt("%.15g", got) + " want " + fmt("%.15g", want));
  };
  const double two_pi = 2.0 * std::numbers::pi;

  // membership and activation
  near(membership({0.3, 0.1}, 0.3), 1.0, 0.0, "membership at mode");
  near(membership({0.3, 0.1}, 0.4), std::exp(-0.5), 1e-15, "membership at mu+sigma");
  v.require(membership({0.3, 0.1}, 1.3) < 2e-22, "membership tail");
  {
    Rule r;
    r.mfs = {{0.1, 0.1}, {0.2, 0.1}, {0.3, 0.1}, {0.4, 0.1}};
    near(activation(r, std::vector<double>{0.1, 0.2, 0.3, 0.4}), 1.0, 0.0, "activation mode");
    near(activation(r, std::vector<double>{0.1, 0.3, 0.3, 0.4}), std::exp(-0.5), 1e-15,
         "activation min");
  }

  // creation
  {
    RuleBase b(4);
    const auto id = b.create_rule(std::vector<double>{0.2, 0.4, 0.6, 0.8}, 3);
    const Rule* r = b.find(id);
    for (const auto& mf : r->mfs) near(mf.sigma, 1.0 / two_pi, 0.0, "creation sigma");
    near(r->mfs[3].mu, 0.8, 0.0, "creation mu");
    v.require(r->label == 3 && r->update_count == 1, "creation metadata");
    RuleBase e(4);
    const auto est = e.learn(std::vector<double>{0.2, 0.4, 0.6, 0.8}, std::nullopt);
    v.require(!est.predicted && e.size() == 1, "empty base first sample");
  }

  // selection with a conflicting label
  {
    RuleBase b(1);
    const double s = 0.1;
    b.insert_rule(rule1(s * std::sqrt(-2.0 * std::log(0.4)), s, 2));
    b.insert_rule(rule1(s * std::sqrt(-2.0 * std::log(0.9)), s, 3));
    const std::vector<double> x{0.0};
    v.require(b.select_rule(x, 2) == b.rules()[0].id, "select skips mismatch");
    v.require(b.select_rule(x, std::nullopt) == b.rules()[1].id, "select argmax");
    v.require(!b.select_rule(std::vector<double>{9.0}, std::nullopt), "select none");
  }

  // recursive mean and dispersion
  {
    RuleBase b(1);
    const auto id = b.create_rule(std::vector<double>{0.5}, 1);
    b.update_rule(id, std::vector<double>{0.7});
    near(b.find(id)->mfs[0].mu, 0.6, 1e-15, "two-point average");
    const double raw = std::sqrt(0.5 * std::pow(1.0 / two_pi, 2) + 0.5 * 0.04);
    near(raw, 0.180736, 1e-6, "dispersion before clamp");
    near(b.find(id)->mfs[0].sigma, 1.0 / two_pi, 0.0, "dispersion clamp");

    RuleBase z(1);
    const auto zid = z.create_rule(std::vector<double>{0.5}, 1);
    double sigma = 1.0 / two_pi;
    for (int w = 2; w <= 10; ++w) {
      z.update_rule(zid, std::vector<double>{0.5});
      sigma = std::max(1.0 / (4.0 * std::numbers::pi), std::sqrt((w - 1.0) / w) * sigma);
      near(z.find(zid)->mfs[0].sigma, sigma, 1e-15, "zero-innovation shrink");
      near(z.find(zid)->mfs[0].mu, 0.5, 0.0, "zero-innovation mean");
    }
  }

  // tagging
  {
    RuleBase b(4);
    const std::vector<double> x{0.3, 0.3, 0.3, 0.3};
    v.require(b.tag_active(x, 1) == 0, "tag none");
    b.create_rule(x, std::nullopt);
    b.create_rule(std::vector<double>{0.32, 0.3, 0.3, 0.3}, std::nullopt);
    v.require(b.tag_active(x, 4) == 2 && b.rules()[1].label == 4, "tag two");
  }

  // rho ratio dynamics
  {
    Hyperparameters hp;
    hp.inactivity_horizon = 5;
    RuleBase b(1, hp);
    Rule a = rule1(0.0, 0.15);
    Rule c = rule1(5.0, 0.05);
    c.last_active = 10;
    b.insert_rule(a);
    b.insert_rule(c);
    for (int i = 0; i < 10; ++i) b.advance_step();
    b.update_rho();
    b.update_rho();
    near(b.rho(), 0.1, 0.0, "rho unchanged");
    b.delete_inactive();
    b.update_rho();
    near(b.rho(), 0.05, 1e-15, "rho halves");

    Hyperparameters wide;
    wide.merge_threshold = 1.0;
    RuleBase m(1, wide);
    m.set_rho(0.8);
    m.insert_rule(rule1(0.0, 0.05, 1));
    m.insert_rule(rule1(0.01, 0.05, 1));
    m.update_rho();
    m.merge_closest();
    m.update_rho();
    near(m.rho(), 1.0, 0.0, "rho clamp at 1");
  }

  // granule distance
  near(granule_distance(rule1(0.0, 0.05), rule1(0.1, 0.05)), 0.1, 1e-15, "distance mu");
  near(granule_distance(rule1(0.3, 0.16), rule1(0.3, 0.04)), 0.04, 1e-15, "distance sigma");
  near(granule_distance(rule1(0.3, 0.16), rule1(0.3, 0.16)), 0.0, 0.0, "distance self");

  // merging
  {
    Hyperparameters hp;
    hp.merge_threshold = 2.0;
    RuleBase b(1, hp);
    b.insert_rule(rule1(0.0, 0.1));
    b.insert_rule(rule1(1.0, 0.05));
    v.require(b.merge_closest().has_value() && b.size() == 1, "merge happens");
    near(b.rules()[0].mfs[0].mu, 0.2, 1e-15, "merge weights 2/0.5");
    near(b.rules()[0].mfs[0].sigma, 0.15, 1e-15, "merge dispersion sum");

    RuleBase e(1, hp);
    e.insert_rule(rule1(0.2, 0.05));
    e.insert_rule(rule1(0.4, 0.05));
    e.merge_closest();
    near(e.rules()[0].mfs[0].mu, 0.3, 1e-15, "merge symmetric");

    RuleBase f(1);
    f.insert_rule(rule1(0.0, 0.1));
    f.insert_rule(rule1(0.5, 0.1));
    v.require(!f.merge_closest() && f.size() == 2, "merge threshold gate");
  }

  // deletion
  {
    Hyperparameters hp;
    hp.inactivity_horizon = 3;
    RuleBase b(1, hp);
    b.create_rule(std::vector<double>{0.0}, 1);
    for (int i = 0; i < 3; ++i) b.advance_step();
    v.require(b.delete_inactive() == 0, "delete within horizon");
    b.advance_step();
    v.require(b.delete_inactive() == 1, "delete idle");
    hp.inactivity_horizon = kNeverDelete;
    RuleBase k(1, hp);
    k.create_rule(std::vector<double>{0.0}, 1);
    for (int i = 0; i < 5000; ++i) k.advance_step();
    v.require(k.delete_inactive() == 0, "infinite horizon");
  }

  // learn
  {
    RuleBase b(4);
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
    b.create_rule(x, 4);
    const auto est = b.learn(x, std::nullopt);
    v.require(est.predicted == 4 && b.rules()[0].mfs[0].mu == 0.1 &&
                  b.rules()[0].mfs[0].sigma < 1.0 / two_pi,
              "learn at modal point");
    const auto before = b.size();
    b.learn(x, 2);
    v.require(b.size() == before + 1, "learn conflicting label");
  }

  v.detail = v.failures.empty() ? "all worked examples hold"
                                : std::to_string(v.failures.size()) + " examples failed";
  return v;
}

Verdict invariant_suite() {
  Verdict v;
  std::size_t total = 0;
  std::size_t steps = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto rep = inv::check_trajectory(seed, 10000);
    total += rep.violations();
    steps += rep.steps;
    v.require(rep.violations() == 0,
              "seed " + std::to_string(seed) + ": " + rep.describe());
  }
  v.detail = "20 trajectories, " + std::to_string(steps) + " steps, " +
             std::to_string(total) + " violations";
  return v;
}

std::map<std::string, ExperimentResult> by_id(const PlanOutcome& out) {
  std::map<std::string, ExperimentResult> m;
  for (const auto& r : out.results) m.emplace(r.cell.id(), r);
  return m;
}

double max_run_seconds(const PlanOutcome& out) {
  double m = 0.0;
  for (const auto& r : out.runs) m = std::max(m, r.wall_seconds);
  return m;
}

double g_max_cell_seconds = 0.0;

Verdict table_grid() {
  Verdict v;
  ExperimentPlan plan;
  plan.snr_list = {20, 40, 60};
  plan.cycles_list = {1, 4, 10};
  plan.labeled_fractions = {1.0};
  plan.seeds = {1, 2, 3, 4, 5};
  const auto out = run_plan(plan);
  v.require(out.errors.empty(), "plan errors");
  const auto cells = by_id(out);
  auto acc = [&](double snr, std::size_t cyc) {
    return cells.at(CellSpec{snr, cyc, 1.0}.id()).acc.mean;
  };

  std::printf("    %-22s %16s %14s %12s\n", "cell", "acc %", "rules", "time s");
  for (const auto& r : out.results)
    std::printf("    %-22s %7.2f +- %5.2f %6.2f +- %4.2f %5.2f +- %4.2f\n",
                r.cell.id().c_str(), r.acc.mean, r.acc.half_width, r.rules.mean,
                r.rules.half_width, r.time.mean, r.time.half_width);

  v.require(acc(20, 4) >= 87.0, "20 dB / 4 cycles " + fmt("%.2f%%", acc(20, 4)));
  v.require(acc(20, 10) >= 89.0, "20 dB / 10 cycles " + fmt("%.2f%%", acc(20, 10)));
  for (double snr : plan.snr_list)
    v.require(acc(snr, 4) - acc(snr, 1) >= 10.0,
              "1-cycle gap at " + fmt("%g dB", snr) + " is " +
                  fmt("%.2f", acc(snr, 4) - acc(snr, 1)));
  double lo_rules = 1e9, hi_rules = 0.0;
  for (const auto& r : out.results) {
    lo_rules = std::min(lo_rules, r.rules.mean);
    hi_rules = std::max(hi_rules, r.rules.mean);
    v.require(r.rules.mean >= 5.0 && r.rules.mean <= 16.0,
              r.cell.id() + " rules " + fmt("%.2f", r.rules.mean));
  }
  const double spread = std::max({acc(20, 4), acc(40, 4), acc(60, 4)}) -
                        std::min({acc(20, 4), acc(40, 4), acc(60, 4)});
  v.require(spread <= 8.0, "SNR spread " + fmt("%.2f", spread));
  g_max_cell_seconds = max_run_seconds(out);
  v.require(g_max_cell_seconds <= 30.0, "slowest run " + fmt("%.2f s", g_max_cell_seconds));

  v.detail = "acc 20dB/4c " + fmt("%.2f", acc(20, 4)) + ", 20dB/10c " +
             fmt("%.2f", acc(20, 10)) + ", SNR spread " + fmt("%.2f", spread) +
             ", rules " + fmt("%.2f", lo_rules) + ".." + fmt("%.2f", hi_rules) +
             ", slowest run " + fmt("%.2f s", g_max_cell_seconds);
  return v;
}

Verdict fraction_sweep() {
  Verdict v;
  ExperimentPlan plan;
  plan.snr_list = {20};
  plan.cycles_list = {4};
  for (int i = 0; i <= 10; ++i) plan.labeled_fractions.push_back(i / 10.0);
  plan.seeds = {1, 2, 3, 4, 5};
  const auto out = run_plan(plan);
  v.require(out.errors.empty() && out.results.size() == 11, "sweep shape");

  const double full = out.results.back().acc.mean;
  std::printf("    %-22s %10s %10s\n", "cell", "acc %", "purity %");
  for (const auto& r : out.results)
    std::printf("    %-22s %10.2f %10.2f\n", r.cell.id().c_str(), r.acc.mean,
                r.purity.mean);
  const double unsup = out.results.front().purity.mean;
  v.require(full - unsup <= 12.0, "fraction 0.0 purity " + fmt("%.2f", unsup) +
                                      " vs labeled " + fmt("%.2f", full));
  double worst = 0.0;
  for (const auto& r : out.results) {
    if (r.cell.labeled_fraction < 0.3 - 1e-9) continue;
    const double drop = full - r.acc.mean;
    worst = std::max(worst, drop);
    v.require(drop <= 10.0, r.cell.id() + " drop " + fmt("%.2f", drop));
  }
  g_max_cell_seconds = std::max(g_max_cell_seconds, max_run_seconds(out));
  v.detail = "labeled " + fmt("%.2f", full) + ", unlabeled purity " +
             fmt("%.2f", unsup) + ", worst drop at >= 0.3 " + fmt("%.2f", worst);
  return v;
}

Verdict generator_checks() {
  Verdict v;
  // Empirical SNR against the noiseless twin of each window.
  double worst_db = 0.0;
  for (std::size_t cycles : {4u, 10u}) {
    for (double snr : {20.0, 40.0, 60.0}) {
      SignalConfig noisy;
      noisy.cycles_per_window = cycles;
      noisy.snr_db = snr;
      SignalConfig clean = noisy;
      clean.snr_db = kNoiseless;
      // Pooled over 10 windows per class so estimator spread stays small.
      for (auto cls : kAllClasses) {
        std::vector<double> residual;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
          const auto n = generate_window(noisy, cls, seed);
          const auto c = generate_window(clean, cls, seed);
          for (std::size_t i = 0; i < n.samples.size(); ++i)
            residual.push_back(2.0 * (n.samples[i] - c.samples[i]));
        }
        worst_db = std::max(worst_db, std::abs(empirical_snr_db(1.0, residual) - snr));
      }
    }
  }
  v.require(worst_db <= 0.5, "SNR error " + fmt("%.3f dB", worst_db));

  SignalConfig one;
  one.cycles_per_window = 1;
  StreamGenerator gen({2000, 1.0, 3}, one);
  int counts[6] = {};
  while (!gen.done()) ++counts[to_code(gen.next().waveform.label)];
  for (int c = 1; c <= 5; ++c) v.require(counts[c] == 2000, "class balance");

  // Notch periodicity and spike counts from differences to the clean twin.
  auto runs = [](const Waveform& a, const Waveform& b) {
    std::vector<std::size_t> starts;
    bool in = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      const bool d = std::abs(a.samples[i] - b.samples[i]) > 1e-12;
      if (d && !in) starts.push_back(i);
      in = d;
    }
    return starts;
  };
  one.snr_db = kNoiseless;
  bool notch_ok = true;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto s = runs(generate_window(one, DisturbanceClass::kNotching, seed),
                        generate_window(one, DisturbanceClass::kNone, seed));
    notch_ok = notch_ok && s.size() == 8;
    for (std::size_t k = 1; k < s.size(); ++k) notch_ok = notch_ok && s[k] - s[k - 1] == 32;
  }
  v.require(notch_ok, "notch periodicity");
  bool spike_ok = true;
  for (std::size_t cycles : {1u, 4u, 10u}) {
    SignalConfig cfg;
    cfg.cycles_per_window = cycles;
    cfg.snr_db = kNoiseless;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      const auto s = runs(generate_window(cfg, DisturbanceClass::kSpike, seed),
                          generate_window(cfg, DisturbanceClass::kNone, seed));
      spike_ok = spike_ok && s.size() == cycles;
    }
  }
  v.require(spike_ok, "spike count per cycle");
  v.detail = "worst SNR error " + fmt("%.3f dB", worst_db) +
             ", balance 2000x5, notch period 32, one spike per cycle";
  return v;
}

Verdict wall_time_budget() {
  Verdict v;
  v.require(g_max_cell_seconds > 0.0, "no timed runs");
  v.require(g_max_cell_seconds <= 30.0, "slowest run " + fmt("%.2f s", g_max_cell_seconds));
  v.detail = "hardware-specific timings replaced by a 30 s budget; slowest 10000-window run " +
             fmt("%.2f s", g_max_cell_seconds);
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"C1 HP banded solve vs dense oracle", hp_oracle},
      {"C2 DFT amplitude vs naive summation", dft_oracle},
      {"C3 classifier unit algebra", classifier_algebra},
      {"C4 randomized invariant suite", invariant_suite},
      {"C5 SNR x window-length grid bands", table_grid},
      {"C6 labeled-fraction sweep bands", fraction_sweep},
      {"C7 generator statistics", generator_checks},
      {"C8 per-cell wall-time budget", wall_time_budget},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s  %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", name,
                v.detail.c_str(), since(t0));
    for (const auto& f : v.failures) std::printf("      - %s\n", f.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
