#include "egfc/report.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace egfc {

namespace {

// Restores stream formatting on scope exit.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(std::ostream& os)
      : os_(os), flags_(os.flags()), precision_(os.precision()) {}
  ~PrecisionGuard() {
    os_.flags(flags_);
    os_.precision(precision_);
  }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  std::ostream& os_;
  std::ios::fmtflags flags_;
  std::streamsize precision_;
};

void round_trip(std::ostream& os) {
  os << std::defaultfloat
     << std::setprecision(std::numeric_limits<double>::max_digits10);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number: " + s);
  return v;
}

std::uint64_t to_uint(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used);
  if (used != s.size()) throw std::runtime_error("bad integer: " + s);
  return v;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open " + p.string());
  return os;
}

}  // namespace

void write_waveforms_csv(std::ostream& os, std::span<const StreamItem> items) {
  PrecisionGuard guard(os);
  round_trip(os);
  os << "seed,class,label_visible";
  const std::size_t n = items.empty() ? 0 : items.front().waveform.samples.size();
  for (std::size_t i = 0; i < n; ++i) os << ",s" << i;
  os << '\n';
  for (const auto& item : items) {
    os << item.waveform.seed_used << ',' << to_code(item.waveform.label) << ','
       << (item.visible_label ? 1 : 0);
    for (double s : item.waveform.samples) os << ',' << s;
    os << '\n';
  }
}

void write_attributes_csv(std::ostream& os, const FeatureStream& stream,
                          double labeled_fraction) {
  PrecisionGuard guard(os);
  round_trip(os);
  os << "h,x1,x2,x3,x4,label,visible\n";
  for (std::size_t i = 0; i < stream.attributes.size(); ++i) {
    const auto& x = stream.attributes[i];
    os << i + 1 << ',' << x.x1 << ',' << x.x2 << ',' << x.x3 << ',' << x.x4
       << ',' << stream.truth[i] << ','
       << (stream.mask_draws[i] < labeled_fraction ? 1 : 0) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os,
                          std::span<const TrajectoryPoint> trajectory) {
  PrecisionGuard guard(os);
  round_trip(os);
  os << "h,acc,c,rho\n";
  for (const auto& p : trajectory)
    os << p.h << ',' << p.acc << ',' << p.rules << ',' << p.rho << '\n';
}

void write_confusion_csv(std::ostream& os, const ConfusionMatrix& confusion) {
  os << "truth";
  for (int c = 1; c <= confusion.num_classes(); ++c) os << ",pred_" << c;
  os << ",unknown\n";
  for (int t = 1; t <= confusion.num_classes(); ++t) {
    os << t;
    for (int c = 1; c <= confusion.num_classes(); ++c)
      os << ',' << confusion.at(t, c);
    os << ',' << confusion.unknown(t) << '\n';
  }
}

void write_rulebase_csv(std::ostream& os, const RuleBaseSnapshot& snap) {
  PrecisionGuard guard(os);
  round_trip(os);
  const std::size_t n = snap.rules.empty() ? 0 : snap.rules.front().dim();
  os << "# h=" << snap.step << " rho=" << snap.rho << " n=" << n << '\n';
  os << "rule_id,class";
  for (std::size_t j = 1; j <= n; ++j) os << ",mu" << j;
  for (std::size_t j = 1; j <= n; ++j) os << ",sigma" << j;
  os << ",updates,last_active\n";
  for (const auto& r : snap.rules) {
    os << r.id << ',';
    if (r.label) os << *r.label;
    for (const auto& mf : r.mfs) os << ',' << mf.mu;
    for (const auto& mf : r.mfs) os << ',' << mf.sigma;
    os << ',' << r.update_count << ',' << r.last_active << '\n';
  }
}

RuleBaseSnapshot read_rulebase_csv(std::istream& is) {
  RuleBaseSnapshot snap;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("rulebase csv: missing header comment");
  std::size_t n = 0;
  {
    std::istringstream ss(line.substr(2));
    std::string tok;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::runtime_error("bad header " + tok);
      const auto key = tok.substr(0, eq);
      const auto val = tok.substr(eq + 1);
      if (key == "h") snap.step = to_uint(val);
      else if (key == "rho") snap.rho = to_double(val);
      else if (key == "n") n = to_uint(val);
    }
  }
  if (!std::getline(is, line) || line.rfind("rule_id,class", 0) != 0)
    throw std::runtime_error("rulebase csv: missing column header");

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 2 * n + 4)
      throw std::runtime_error("rulebase csv: wrong field count");
    Rule r;
    r.id = to_uint(f[0]);
    if (!f[1].empty()) r.label = static_cast<Label>(std::stoi(f[1]));
    r.mfs.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      r.mfs[j].mu = to_double(f[2 + j]);
      r.mfs[j].sigma = to_double(f[2 + n + j]);
    }
    r.update_count = to_uint(f[2 + 2 * n]);
    r.last_active = to_uint(f[3 + 2 * n]);
    snap.rules.push_back(std::move(r));
  }
  return snap;
}

void write_summary_csv(std::ostream& os,
                       std::span<const ExperimentResult> results) {
  PrecisionGuard guard(os);
  os << "cell_id,snr_db,cycles,fraction,runs,acc_mean,acc_ci,rules_mean,"
        "rules_ci,time_mean,time_ci,purity_mean,purity_ci\n";
  os << std::fixed << std::setprecision(6);
  for (const auto& r : results) {
    os << r.cell.id() << ',' << r.cell.snr_db << ',' << r.cell.cycles << ','
       << r.cell.labeled_fraction << ',' << r.runs << ',' << r.acc.mean << ','
       << r.acc.half_width << ',' << r.rules.mean << ',' << r.rules.half_width
       << ',' << r.time.mean << ',' << r.time.half_width << ','
       << r.purity.mean << ',' << r.purity.half_width << '\n';
  }
}

void write_runs_csv(std::ostream& os, std::span<const RunRecord> runs) {
  PrecisionGuard guard(os);
  round_trip(os);
  os << "cell_id,seed,acc,purity,c_avg,final_rules,labels_seen,wall_seconds\n";
  for (const auto& r : runs)
    os << r.cell.id() << ',' << r.seed << ',' << r.acc << ',' << r.purity
       << ',' << r.c_avg << ',' << r.final_rules << ',' << r.labels_seen << ','
       << r.wall_seconds << '\n';
}

void write_run_files(const std::filesystem::path& dir, const RunRecord& run) {
  std::filesystem::create_directories(dir);
  auto traj = open_out(dir / "trajectory.csv");
  write_trajectory_csv(traj, run.trajectory);
  auto conf = open_out(dir / "confusion.csv");
  write_confusion_csv(conf, run.confusion);
  auto rb = open_out(dir / "rulebase.csv");
  write_rulebase_csv(rb, run.final_base);
  if (!traj || !conf || !rb)
    throw std::runtime_error("write failed under " + dir.string());
}

}  // namespace egfc
