#include "fluscope/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fluscope/parallel.hpp"

namespace fluscope::anomaly {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
  double z;
  bool sick;
};

// F1 = 2tp / (2tp + fp + fn) kept as a fraction for exact comparison.
struct F1 {
  std::uint64_t num = 0, den = 1;
  double value() const { return num == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
  bool at_least(const F1& o) const {
    return static_cast<unsigned __int128>(num) * o.den >= static_cast<unsigned __int128>(o.num) * den;
  }
};

F1 f1_of(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  if (tp == 0) return {0, 1};
  return {2 * tp, 2 * tp + fp + fn};
}

double between(double a, double b) {
  if (std::isinf(b)) return a + 1.0;
  const double mid = a + (b - a) / 2;
  return mid < b ? mid : a;
}

// Ascending sweep over `sorted` ignoring position `skip`.
std::pair<double, F1> sweep(const std::vector<Entry>& sorted, std::size_t skip) {
  std::uint64_t P = 0, N = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == skip) continue;
    (sorted[i].sick ? P : N) += 1;
  }
  std::size_t first = sorted.size();
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (i != skip) {
      first = i;
      break;
    }
  if (first == sorted.size()) return {0.0, F1{}};

  double best_t = std::isinf(sorted[first].z) ? 0.0 : sorted[first].z - 1.0;
  F1 best = f1_of(P, N, 0);
  std::uint64_t tp = P, fp = N;  // predicted sick: everything above the candidate
  std::size_t i = first;
  while (i < sorted.size()) {
    const double v = sorted[i].z;
    std::size_t j = i;
    while (j < sorted.size() && (j == skip || sorted[j].z == v)) {
      if (j != skip) (sorted[j].sick ? tp : fp) -= 1;
      ++j;
    }
    std::size_t next = j;
    while (next < sorted.size() && next == skip) ++next;
    const double t = next < sorted.size() ? between(v, sorted[next].z) : (std::isinf(v) ? kInf : v + 1.0);
    const F1 f = f1_of(tp, fp, P - tp);
    if (f.at_least(best)) {
      best = f;
      best_t = t;
    }
    i = next;
  }
  return {best_t, best};
}

std::vector<Entry> sorted_entries(std::span<const Instance> instances) {
  if (instances.size() < 2) throw InsufficientData("threshold fitting needs at least two instances");
  std::vector<Entry> out;
  std::size_t sick = 0;
  for (const auto& in : instances) {
    if (std::isnan(in.z) || in.z < 0) throw DataError("z-scores must be non-negative numbers");
    out.push_back({in.z, is_sick(in.label)});
    sick += is_sick(in.label) ? 1 : 0;
  }
  if (sick == 0 || sick == instances.size()) throw InsufficientData("threshold fitting needs both classes");
  std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.z < b.z; });
  return out;
}

ThresholdFit fit(std::span<const Instance> instances, bool parallel) {
  const auto sorted = sorted_entries(instances);
  ThresholdFit out;
  const auto [t, f] = sweep(sorted, sorted.size());
  out.threshold = t;
  out.f1 = f.value();

  // Position of each instance in the sorted order; any position holding an equal (z, label) works.
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return instances[a].z < instances[b].z; });
  std::vector<std::size_t> position(instances.size());
  for (std::size_t p = 0; p < order.size(); ++p) position[order[p]] = p;

  out.fold_thresholds.resize(instances.size());
  out.held_out_predictions.resize(instances.size());
  auto body = [&](std::size_t i) {
    out.fold_thresholds[i] = sweep(sorted, position[i]).first;
    out.held_out_predictions[i] = classify(instances[i].z, out.fold_thresholds[i]);
  };
  if (parallel) {
    parallel_for(instances.size(), body);
  } else {
    for (std::size_t i = 0; i < instances.size(); ++i) body(i);
  }
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const bool truth = is_sick(instances[i].label), pred = is_sick(out.held_out_predictions[i]);
    if (truth && pred) ++tp;
    else if (pred) ++fp;
    else if (truth) ++fn;
  }
  out.held_out_f1 = f1_of(tp, fp, fn).value();
  return out;
}

}  // namespace

MonthlySeries monthly_series(const corpus::Cohort& cohort, const std::string& user_id) {
  const auto account = cohort.find_account(user_id);
  if (!account) throw DataError("unknown user '" + user_id + "'");
  MonthlySeries out;
  for (const auto m : cohort.window().months()) out.push_back({m, cohort.tweets_of(*account, m).size()});
  return out;
}

MonthlySeries eligible_months(const MonthlySeries& series, std::uint64_t min_count) {
  MonthlySeries out;
  std::copy_if(series.begin(), series.end(), std::back_inserter(out),
               [&](const MonthCount& m) { return m.count >= min_count; });
  return out;
}

AnomalyScore zscore(double x, std::span<const double> eligible, bool exclude_target) {
  std::vector<double> v(eligible.begin(), eligible.end());
  if (exclude_target) {
    const auto it = std::find(v.begin(), v.end(), x);
    if (it != v.end()) v.erase(it);
  }
  if (v.size() < 2) throw InsufficientData("z-score needs at least two eligible months");
  const double n = static_cast<double>(v.size());
  double mean = 0;
  for (const double c : v) mean += c;
  mean /= n;
  double ss = 0;
  for (const double c : v) ss += (c - mean) * (c - mean);
  const double sd = std::sqrt(ss / (n - 1));
  AnomalyScore s{0.0, mean, sd};
  if (sd == 0.0) {
    s.z = x == mean ? 0.0 : kInf;
  } else {
    s.z = std::abs(x - mean) / sd;
  }
  return s;
}

AnomalyScore zscore(YearMonth target, const MonthlySeries& series, bool exclude_target, std::uint64_t min_count) {
  const auto eligible = eligible_months(series, min_count);
  const auto it = std::find_if(eligible.begin(), eligible.end(), [&](const MonthCount& m) { return m.month == target; });
  if (it == eligible.end()) throw ConfigError("month " + target.str() + " is not an eligible month");
  std::vector<double> counts;
  for (const auto& m : eligible)
    if (!(exclude_target && m.month == target)) counts.push_back(static_cast<double>(m.count));
  if (counts.size() < 2) throw InsufficientData("z-score needs at least two eligible months");
  // The target was already removed above; do not remove a second value.
  return zscore(static_cast<double>(it->count), counts, false);
}

Label classify(double z, double threshold) { return z > threshold ? Label::sick : Label::not_sick; }

double anomaly_probability(double z, double threshold) {
  if (std::isinf(z)) return std::isinf(threshold) ? 0.5 : 1.0;
  if (std::isinf(threshold)) return 0.0;
  const double d = z - threshold;
  if (d >= 0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

std::vector<double> candidate_thresholds(std::span<const Instance> instances) {
  std::vector<double> zs;
  for (const auto& in : instances) zs.push_back(in.z);
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  std::vector<double> out;
  if (zs.empty()) return out;
  out.push_back(std::isinf(zs.front()) ? 0.0 : zs.front() - 1.0);
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) out.push_back(between(zs[i], zs[i + 1]));
  out.push_back(std::isinf(zs.back()) ? kInf : zs.back() + 1.0);
  return out;
}

std::pair<double, double> best_threshold(std::span<const Instance> instances) {
  const auto sorted = sorted_entries(instances);
  const auto [t, f] = sweep(sorted, sorted.size());
  return {t, f.value()};
}

ThresholdFit fit_threshold_loocv(std::span<const Instance> instances) { return fit(instances, true); }

namespace serial {
ThresholdFit fit_threshold_loocv(std::span<const Instance> instances) { return fit(instances, false); }
}  // namespace serial

}  // namespace fluscope::anomaly
