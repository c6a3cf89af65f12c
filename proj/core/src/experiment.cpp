#include "egfc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "egfc/report.hpp"

namespace egfc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open " + p.string());
  return os;
}

}  // namespace

void PipelineParams::validate() const {
  hyper.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  for (double g : attribute_gain)
    if (!(g > 0.0) || !std::isfinite(g))
      throw std::invalid_argument("attribute gains must be positive");
  if (per_class == 0) throw std::invalid_argument("per_class must be > 0");
}

std::string CellSpec::id() const {
  char buf[96];
  if (std::isinf(snr_db))
    std::snprintf(buf, sizeof buf, "snrinf_cyc%zu_frac%.2f", cycles,
                  labeled_fraction);
  else
    std::snprintf(buf, sizeof buf, "snr%g_cyc%zu_frac%.2f", snr_db, cycles,
                  labeled_fraction);
  return buf;
}

std::vector<CellSpec> ExperimentPlan::cells() const {
  std::vector<CellSpec> out;
  for (double snr : snr_list)
    for (std::size_t cyc : cycles_list)
      for (double f : labeled_fractions) out.push_back({snr, cyc, f});
  return out;
}

void ExperimentPlan::validate() const {
  params.validate();
  for (double f : labeled_fractions)
    if (!(f >= 0.0 && f <= 1.0))
      throw std::invalid_argument("labeled fractions must lie in [0, 1]");
  for (std::size_t c : cycles_list)
    if (c == 0) throw std::invalid_argument("cycles must be positive");
  for (double s : snr_list)
    if (std::isnan(s)) throw std::invalid_argument("SNR is NaN");
  if (!cells().empty() && seeds.empty())
    throw std::invalid_argument("plan has cells but no seeds");
}

FeatureStream extract_stream(double snr_db, std::size_t cycles,
                             std::uint64_t seed, const PipelineParams& params) {
  const auto t0 = Clock::now();
  SignalConfig config;
  config.cycles_per_window = cycles;
  config.snr_db = snr_db;
  config.rng_seed = seed;
  StreamSpec spec;
  spec.per_class = params.per_class;
  spec.rng_seed = seed;

  StreamGenerator gen(spec, config);
  const AttributeExtractor extract(config, params.lambda);
  FeatureStream out;
  out.snr_db = snr_db;
  out.cycles = cycles;
  out.seed = seed;
  out.attributes.reserve(gen.size());
  out.truth.reserve(gen.size());
  out.mask_draws.reserve(gen.size());
  while (!gen.done()) {
    const StreamItem item = gen.next();
    out.attributes.push_back(extract(item.waveform.samples));
    out.truth.push_back(to_code(item.waveform.label));
    out.mask_draws.push_back(item.mask_draw);
  }
  out.extraction_seconds = seconds_since(t0);
  return out;
}

RuleBaseSnapshot snapshot(const RuleBase& base) {
  return {base.rules(), base.rho(), base.step()};
}

RunRecord run_stream(const FeatureStream& stream, double labeled_fraction,
                     const PipelineParams& params) {
  params.validate();
  const auto t0 = Clock::now();
  RuleBase base(AttributeVector::kSize, params.hyper);
  StreamScore score(kNumClasses);
  std::vector<Assignment> assignments;
  assignments.reserve(stream.attributes.size());

  RunRecord rec;
  rec.cell = {stream.snr_db, stream.cycles, labeled_fraction};
  rec.seed = stream.seed;
  rec.trajectory.reserve(stream.attributes.size());

  for (std::size_t i = 0; i < stream.attributes.size(); ++i) {
    auto x = stream.attributes[i].values();
    for (std::size_t j = 0; j < x.size(); ++j) x[j] *= params.attribute_gain[j];
    const int truth = stream.truth[i];
    std::optional<Label> label;
    if (stream.mask_draws[i] < labeled_fraction) {
      label = truth;
      ++rec.labels_seen;
    }
    const ClassEstimate est = base.learn(x, label);
    score.update_accuracy(est.predicted, truth);
    score.update_cavg(base.size());
    assignments.push_back({est.winning_rule, truth});
    rec.trajectory.push_back({i + 1, score.acc(), base.size(), base.rho()});
  }

  rec.acc = score.acc();
  rec.c_avg = score.c_avg();
  rec.purity = assignments.empty() ? 0.0 : purity_score(assignments);
  rec.final_rules = base.size();
  rec.confusion = score.confusion;
  rec.final_base = snapshot(base);
  rec.wall_seconds = stream.extraction_seconds + seconds_since(t0);
  return rec;
}

RunRecord run_cell(const CellSpec& cell, std::uint64_t seed,
                   const PipelineParams& params) {
  if (!(cell.labeled_fraction >= 0.0 && cell.labeled_fraction <= 1.0))
    throw std::invalid_argument("labeled fraction must lie in [0, 1]");
  const auto stream = extract_stream(cell.snr_db, cell.cycles, seed, params);
  return run_stream(stream, cell.labeled_fraction, params);
}

ExperimentResult aggregate(std::span<const RunRecord> runs, double confidence) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  ExperimentResult out;
  out.cell = runs.front().cell;
  out.runs = runs.size();
  std::vector<double> acc, pur, rules, time;
  for (const auto& r : runs) {
    if (r.cell.id() != out.cell.id())
      throw std::invalid_argument("aggregate: runs from different cells");
    acc.push_back(100.0 * r.acc);
    pur.push_back(100.0 * r.purity);
    rules.push_back(r.c_avg);
    time.push_back(r.wall_seconds);
    out.confusion.merge(r.confusion);
  }
  out.acc = t_interval(acc, confidence);
  out.purity = t_interval(pur, confidence);
  out.rules = t_interval(rules, confidence);
  out.time = t_interval(time, confidence);
  return out;
}

PlanOutcome run_plan(const ExperimentPlan& plan) {
  plan.validate();
  PlanOutcome outcome;
  const auto cells = plan.cells();
  if (cells.empty()) return outcome;

  // One task per distinct stream; every labeled fraction reuses it.
  struct Task {
    double snr;
    std::size_t cycles;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double snr : plan.snr_list)
    for (std::size_t cyc : plan.cycles_list)
      for (std::uint64_t seed : plan.seeds) tasks.push_back({snr, cyc, seed});

  const std::size_t nf = plan.labeled_fractions.size();
  std::vector<std::optional<RunRecord>> slots(tasks.size() * nf);
  std::vector<std::string> failures(tasks.size() * nf);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
      const Task& task = tasks[t];
      std::optional<FeatureStream> stream;
      try {
        stream = extract_stream(task.snr, task.cycles, task.seed, plan.params);
      } catch (const std::exception& e) {
        for (std::size_t f = 0; f < nf; ++f) failures[t * nf + f] = e.what();
        continue;
      }
      for (std::size_t f = 0; f < nf; ++f) {
        try {
          slots[t * nf + f] =
              run_stream(*stream, plan.labeled_fractions[f], plan.params);
        } catch (const std::exception& e) {
          failures[t * nf + f] = e.what();
        }
      }
    }
  };

  std::size_t nthreads = plan.threads ? plan.threads
                                      : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, tasks.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }

  // Serial fold in plan order.
  const std::size_t ns = plan.seeds.size();
  const bool write = !plan.output_dir.empty();
  for (std::size_t si = 0; si < plan.snr_list.size(); ++si) {
    for (std::size_t ci = 0; ci < plan.cycles_list.size(); ++ci) {
      for (std::size_t f = 0; f < nf; ++f) {
        const CellSpec cell{plan.snr_list[si], plan.cycles_list[ci],
                            plan.labeled_fractions[f]};
        std::vector<RunRecord> cell_runs;
        for (std::size_t k = 0; k < ns; ++k) {
          const std::size_t t = (si * plan.cycles_list.size() + ci) * ns + k;
          const std::size_t slot = t * nf + f;
          if (slots[slot]) {
            cell_runs.push_back(std::move(*slots[slot]));
          } else {
            outcome.errors.push_back({cell.id(), plan.seeds[k], failures[slot]});
          }
        }
        if (cell_runs.empty()) continue;
        outcome.results.push_back(aggregate(cell_runs));
        if (write) {
          try {
            const auto dir = plan.output_dir / cell.id();
            for (const auto& r : cell_runs)
              write_run_files(dir / ("seed_" + std::to_string(r.seed)), r);
            auto os = open_out(dir / "confusion.csv");
            write_confusion_csv(os, outcome.results.back().confusion);
          } catch (const std::exception& e) {
            outcome.errors.push_back({cell.id(), 0, e.what()});
          }
        }
        for (auto& r : cell_runs) outcome.runs.push_back(std::move(r));
      }
    }
  }

  if (write) {
    std::filesystem::create_directories(plan.output_dir);
    auto summary = open_out(plan.output_dir / "summary.csv");
    write_summary_csv(summary, outcome.results);
    auto runs = open_out(plan.output_dir / "runs.csv");
    write_runs_csv(runs, outcome.runs);
  }
  return outcome;
}

namespace {

double json_snr(const nlohmann::json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kNoiseless;
    throw std::invalid_argument("snr must be a number or \"inf\"");
  }
  return v.get<double>();
}

template <typename T>
std::vector<T> json_list(const nlohmann::json& v) {
  if (!v.is_array()) throw std::invalid_argument("expected a JSON array");
  return v.get<std::vector<T>>();
}

}  // namespace

ExperimentPlan parse_plan(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("plan is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("plan must be a JSON object");

  ExperimentPlan plan;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "snr_db") {
        if (!v.is_array()) throw std::invalid_argument("snr_db must be an array");
        for (const auto& s : v) plan.snr_list.push_back(json_snr(s));
      } else if (key == "cycles") {
        plan.cycles_list = json_list<std::size_t>(v);
      } else if (key == "labeled_fractions") {
        plan.labeled_fractions = json_list<double>(v);
      } else if (key == "seeds") {
        plan.seeds = json_list<std::uint64_t>(v);
      } else if (key == "rho0") {
        plan.params.hyper.rho0 = v.get<double>();
      } else if (key == "delta") {
        plan.params.hyper.merge_threshold = v.get<double>();
      } else if (key == "hr") {
        if (v.is_string() && v.get<std::string>() == "inf")
          plan.params.hyper.inactivity_horizon = kNeverDelete;
        else
          plan.params.hyper.inactivity_horizon = v.get<std::size_t>();
      } else if (key == "lambda") {
        plan.params.lambda = v.get<double>();
      } else if (key == "attribute_gain") {
        const auto g = json_list<double>(v);
        if (g.size() != AttributeVector::kSize)
          throw std::invalid_argument("attribute_gain needs 4 entries");
        std::copy(g.begin(), g.end(), plan.params.attribute_gain.begin());
      } else if (key == "per_class") {
        plan.params.per_class = v.get<std::size_t>();
      } else if (key == "output_dir") {
        plan.output_dir = v.get<std::string>();
      } else if (key == "threads") {
        plan.threads = v.get<std::size_t>();
      } else {
        throw std::invalid_argument("unknown plan key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("plan schema error: ") + e.what());
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read plan " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_plan(ss.str());
}

}  // namespace egfc
