#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "egfc/experiment.hpp"

namespace egfc {

// CSV writers. Reals are written with round-trip precision except for the
// summary, which uses fixed notation.

/// seed,class,label_visible,s0,s1,...
void write_waveforms_csv(std::ostream& os, std::span<const StreamItem> items);

/// h,x1,x2,x3,x4,label (label is the ground truth; visible marks masking)
void write_attributes_csv(std::ostream& os, const FeatureStream& stream,
                          double labeled_fraction);

/// h,acc,c,rho
void write_trajectory_csv(std::ostream& os,
                          std::span<const TrajectoryPoint> trajectory);

/// truth,pred_1,...,pred_K,unknown
void write_confusion_csv(std::ostream& os, const ConfusionMatrix& confusion);

/// Header comment with h and rho, then
/// rule_id,class,mu1..mun,sigma1..sigman,updates,last_active
/// An unlabeled rule has an empty class field.
void write_rulebase_csv(std::ostream& os, const RuleBaseSnapshot& snap);

/// Inverse of write_rulebase_csv. Throws std::runtime_error on malformed
/// input.
RuleBaseSnapshot read_rulebase_csv(std::istream& is);

/// cell_id,snr_db,cycles,fraction,runs,acc_mean,acc_ci,rules_mean,rules_ci,
/// time_mean,time_ci,purity_mean,purity_ci
void write_summary_csv(std::ostream& os,
                       std::span<const ExperimentResult> results);

/// cell_id,seed,acc,purity,c_avg,final_rules,labels_seen,wall_seconds
void write_runs_csv(std::ostream& os, std::span<const RunRecord> runs);

/// Writes trajectory.csv, confusion.csv and rulebase.csv into `dir`.
void write_run_files(const std::filesystem::path& dir, const RunRecord& run);

}  // namespace egfc
