// egfc: generate streams and run classification experiments.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "egfc/experiment.hpp"
#include "egfc/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> snr;
  std::vector<std::size_t> cycles;
  std::vector<double> fraction;
  std::vector<std::uint64_t> seeds;
  std::optional<double> rho0;
  std::optional<double> delta;
  std::string hr;
  std::optional<double> lambda;
  std::vector<double> gain;
  std::optional<std::size_t> per_class;
  std::optional<std::size_t> threads;
  std::string out;
};

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return egfc::kNoiseless;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad SNR: " + s);
  return v;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "JSON plan file; flags override it")
      ->check(CLI::ExistingFile);
  app->add_option("--snr", o.snr, "SNR values in dB, or inf");
  app->add_option("--cycles", o.cycles, "Window lengths in cycles");
  app->add_option("--fraction", o.fraction, "Labeled fractions in [0,1]");
  app->add_option("--seeds", o.seeds, "Run seeds");
  app->add_option("--rho0", o.rho0, "Initial activation level");
  app->add_option("--delta", o.delta, "Merge distance threshold");
  app->add_option("--hr", o.hr, "Inactivity horizon in samples, or inf");
  app->add_option("--lambda", o.lambda, "HP smoothing parameter");
  app->add_option("--gain", o.gain, "Four attribute gains")->expected(4);
  app->add_option("--per-class", o.per_class, "Windows per class");
  app->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  app->add_option("--out", o.out, "Output directory");
}

struct Defaults {
  std::vector<double> snr;
  std::vector<std::size_t> cycles;
  std::vector<double> fraction;
  std::vector<std::uint64_t> seeds;
  const char* out;
};

egfc::ExperimentPlan build_plan(const Options& o, const Defaults& d) {
  egfc::ExperimentPlan plan;
  if (!o.config.empty()) plan = egfc::load_plan(o.config);
  if (plan.snr_list.empty()) plan.snr_list = d.snr;
  if (plan.cycles_list.empty()) plan.cycles_list = d.cycles;
  if (plan.labeled_fractions.empty()) plan.labeled_fractions = d.fraction;
  if (plan.seeds.empty()) plan.seeds = d.seeds;
  if (plan.output_dir.empty()) plan.output_dir = d.out;

  if (!o.snr.empty()) {
    plan.snr_list.clear();
    for (const auto& s : o.snr) plan.snr_list.push_back(parse_snr(s));
  }
  if (!o.cycles.empty()) plan.cycles_list = o.cycles;
  if (!o.fraction.empty()) plan.labeled_fractions = o.fraction;
  if (!o.seeds.empty()) plan.seeds = o.seeds;
  auto& p = plan.params;
  if (o.rho0) p.hyper.rho0 = *o.rho0;
  if (o.delta) p.hyper.merge_threshold = *o.delta;
  if (!o.hr.empty())
    p.hyper.inactivity_horizon =
        o.hr == "inf" ? egfc::kNeverDelete : std::stoull(o.hr);
  if (o.lambda) p.lambda = *o.lambda;
  if (!o.gain.empty())
    std::copy(o.gain.begin(), o.gain.end(), p.attribute_gain.begin());
  if (o.per_class) p.per_class = *o.per_class;
  if (o.threads) plan.threads = *o.threads;
  if (!o.out.empty()) plan.output_dir = o.out;
  plan.validate();
  return plan;
}

int execute(const egfc::ExperimentPlan& plan) {
  const auto outcome = egfc::run_plan(plan);
  if (!outcome.results.empty())
    std::printf("%-26s %16s %14s %12s %16s\n", "cell", "acc %", "rules",
                "time s", "purity %");
  for (const auto& r : outcome.results)
    std::printf("%-26s %7.2f +- %5.2f %6.2f +- %4.2f %5.2f +- %4.2f %7.2f +- %5.2f\n",
                r.cell.id().c_str(), r.acc.mean, r.acc.half_width, r.rules.mean,
                r.rules.half_width, r.time.mean, r.time.half_width,
                r.purity.mean, r.purity.half_width);
  for (const auto& e : outcome.errors)
    std::fprintf(stderr, "error: %s seed %llu: %s\n", e.cell_id.c_str(),
                 static_cast<unsigned long long>(e.seed), e.message.c_str());
  if (!outcome.results.empty())
    std::printf("wrote %s\n", (plan.output_dir / "summary.csv").c_str());
  return outcome.errors.empty() ? 0 : 2;
}

int generate(const Options& o, bool with_waveforms) {
  const auto plan =
      build_plan(o, {{20.0}, {4}, {1.0}, {1}, "out/generate"});
  if (plan.snr_list.size() != 1 || plan.cycles_list.size() != 1 ||
      plan.labeled_fractions.size() != 1)
    throw std::invalid_argument("generate takes a single SNR, cycles and fraction");
  const double snr = plan.snr_list.front();
  const std::size_t cycles = plan.cycles_list.front();
  const double fraction = plan.labeled_fractions.front();
  fs::create_directories(plan.output_dir);

  for (const auto seed : plan.seeds) {
    const std::string tag = "seed_" + std::to_string(seed);
    if (with_waveforms) {
      egfc::SignalConfig config;
      config.cycles_per_window = cycles;
      config.snr_db = snr;
      egfc::StreamSpec spec{plan.params.per_class, fraction, seed};
      egfc::StreamGenerator gen(spec, config);
      std::ofstream os(plan.output_dir / (tag + "_waveforms.csv"));
      std::vector<egfc::StreamItem> chunk;
      bool header = true;
      // Stream in chunks; only the first chunk carries the header.
      while (!gen.done()) {
        chunk.clear();
        for (int i = 0; i < 256 && !gen.done(); ++i) chunk.push_back(gen.next());
        std::ostringstream buf;
        egfc::write_waveforms_csv(buf, chunk);
        std::string text = buf.str();
        if (!header) text.erase(0, text.find('\n') + 1);
        os << text;
        header = false;
      }
      if (!os) throw std::runtime_error("failed writing waveforms");
    }
    const auto stream = egfc::extract_stream(snr, cycles, seed, plan.params);
    std::ofstream os(plan.output_dir / (tag + "_attributes.csv"));
    egfc::write_attributes_csv(os, stream, fraction);
    if (!os) throw std::runtime_error("failed writing attributes");
  }
  std::printf("wrote %zu seed(s) to %s\n", plan.seeds.size(),
              plan.output_dir.c_str());
  return 0;
}

std::vector<double> sweep_fractions() {
  std::vector<double> f;
  for (int i = 0; i <= 10; ++i) f.push_back(i / 10.0);
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolving Gaussian fuzzy classification of power-quality disturbances"};
  app.require_subcommand(1);

  Options o;
  bool waveforms = true;
  auto* gen = app.add_subcommand("generate", "Dump waveform and attribute CSVs");
  add_common(gen, o);
  gen->add_flag("!--no-waveforms", waveforms, "Write attributes only");
  auto* run = app.add_subcommand("run", "Run a single cell");
  add_common(run, o);
  auto* plan = app.add_subcommand("plan", "Run the SNR x cycles grid");
  add_common(plan, o);
  auto* sweep = app.add_subcommand("sweep", "Sweep the labeled fraction");
  add_common(sweep, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return generate(o, waveforms);
    if (run->parsed()) {
      const auto p = build_plan(o, {{20.0}, {4}, {1.0}, {1}, "out/run"});
      if (p.cells().size() > 1)
        throw std::invalid_argument("run takes a single cell; use plan or sweep");
      return execute(p);
    }
    if (plan->parsed())
      return execute(build_plan(
          o, {{20.0, 40.0, 60.0}, {1, 4, 10}, {1.0}, {1, 2, 3, 4, 5}, "out/plan"}));
    if (sweep->parsed())
      return execute(build_plan(
          o, {{20.0}, {4}, sweep_fractions(), {1, 2, 3, 4, 5}, "out/sweep"}));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "egfc: %s\n", e.what());
    return 1;
  }
  return 0;
}
