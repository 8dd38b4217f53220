#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fluscope/collector.hpp"
#include "fluscope/eval.hpp"
#include "fluscope/features.hpp"
#include "fluscope/pipeline.hpp"

namespace fluscope::report {

/// Fixed-point decimal; the same value always prints the same bytes.
std::string fixed(double v, int digits = 4);
/// Scientific notation with `digits` significant digits after the point.
std::string sci(double v, int digits = 3);

/// Expert keyword, months present, odds ratio, Fisher p-value.
std::string keyword_tests_tsv(const std::vector<pipeline::KeywordTest>& tests);
/// Confusion matrix of the annotation channel plus precision and recall.
std::string human_confusion_tsv(const eval::ConfusionMatrix& c, std::size_t annotated);
/// Anomaly confusion matrix, AUC, F1, accuracy, threshold and KS test.
std::string anomaly_summary_tsv(const pipeline::AnomalySignal& a);
std::string anova_tsv(const stats::AnovaTable& t);
std::string anova_observations_tsv(const pipeline::NetworkAnova& a);
/// Meta rows followed by the baseline row.
std::string meta_tsv(const pipeline::MetaResult& m);
std::string keyword_ratios_tsv(const std::vector<features::KeywordRatio>& ratios);
/// Every candidate of every family with its held-out AUC, accuracy and F1.
std::string candidates_tsv(const pipeline::BaseSignals& s);
/// One row per user-month: id, label and the five selected held-out p_sick values.
std::string signals_csv(const pipeline::BaseSignals& s, const pipeline::Prepared& p);
/// One row per user-month: id, label, eligibility, z, held-out probability.
std::string anomaly_csv(const pipeline::AnomalySignal& a, const pipeline::Prepared& p);
std::string diagnosis_histogram_tsv(const std::map<YearMonth, std::size_t>& h);
/// stem,score rows.
std::string keyword_scores_csv(const std::vector<std::pair<std::string, double>>& rows);

using NamedRoc = std::pair<std::string, eval::RocResult>;
/// series,fpr,tpr rows.
std::string roc_csv(const std::vector<NamedRoc>& curves);
std::string roc_svg(const std::vector<NamedRoc>& curves, const std::string& title);

std::string coverage_tsv(const collector::CoverageReport& c, const collector::World& world);

/// Writes `content` to `path`, creating parent directories. Throws DataError on failure.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace fluscope::report
