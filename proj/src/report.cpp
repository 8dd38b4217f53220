#include "fluscope/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fluscope::report {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  // Avoid "-0.0000".
  std::string s(buf);
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string sci(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

std::string keyword_tests_tsv(const std::vector<pipeline::KeywordTest>& tests) {
  std::ostringstream o;
  o << "keyword\ttotal\tsick_present\tsick_absent\tnot_sick_present\tnot_sick_absent\todds_ratio\tp_value\n";
  for (const auto& t : tests)
    o << t.keyword << '\t' << t.months_present << '\t' << t.table.a << '\t' << t.table.b << '\t' << t.table.c << '\t'
      << t.table.d << '\t' << fixed(t.odds_ratio, 4) << '\t' << sci(t.p_value) << '\n';
  return o.str();
}

std::string human_confusion_tsv(const eval::ConfusionMatrix& c, std::size_t annotated) {
  std::ostringstream o;
  o << "truth\tpredicted_sick\tpredicted_not_sick\n";
  o << "sick\t" << c.tp << '\t' << c.fn << '\n';
  o << "not_sick\t" << c.fp << '\t' << c.tn << '\n';
  o << "# annotated_user_months\t" << annotated << '\n';
  o << "# precision\t" << fixed(c.precision()) << '\n';
  o << "# recall\t" << fixed(c.recall()) << '\n';
  return o.str();
}

std::string anomaly_summary_tsv(const pipeline::AnomalySignal& a) {
  const auto& c = a.report.confusion;
  std::ostringstream o;
  o << "truth\tpredicted_sick\tpredicted_not_sick\n";
  o << "sick\t" << c.tp << '\t' << c.fn << '\n';
  o << "not_sick\t" << c.fp << '\t' << c.tn << '\n';
  o << "# eligible_user_months\t" << a.report.labels.size() << '\n';
  o << "# auc\t" << fixed(a.report.auc) << '\n';
  o << "# f1\t" << fixed(c.f1()) << '\n';
  o << "# accuracy\t" << fixed(c.accuracy()) << '\n';
  o << "# threshold\t" << fixed(a.fit.threshold) << '\n';
  if (a.ks) {
    o << "# ks_statistic\t" << fixed(a.ks->statistic) << '\n';
    o << "# ks_p_value\t" << sci(a.ks->p_value) << '\n';
  }
  return o.str();
}

std::string anova_tsv(const stats::AnovaTable& t) {
  std::ostringstream o;
  o << "factor\tdf\tsum_sq\tmean_sq\tf_value\tp_value\n";
  for (const auto& r : t.rows)
    o << r.factor << '\t' << r.df << '\t' << fixed(r.sum_sq, 6) << '\t' << fixed(r.sum_sq / r.df, 6) << '\t'
      << fixed(r.f_value, 4) << '\t' << sci(r.p_value) << '\n';
  const auto& r = t.residual;
  o << "Residuals\t" << r.df << '\t' << fixed(r.sum_sq, 6) << '\t' << fixed(r.df > 0 ? r.sum_sq / r.df : 0.0, 6)
    << "\t\t\n";
  return o.str();
}

std::string anova_observations_tsv(const pipeline::NetworkAnova& a) {
  std::ostringstream o;
  o << "source\tkeyword_size\tclassifier\trepeat\tauc\n";
  for (const auto& ob : a.observations)
    o << corpus::to_string(ob.source) << '\t' << ob.k << '\t' << learners::to_string(ob.classifier) << '\t'
      << ob.repeat << '\t' << fixed(ob.auc, 6) << '\n';
  return o.str();
}

std::string meta_tsv(const pipeline::MetaResult& m) {
  std::ostringstream o;
  o << "classifier\tauc\taccuracy\n";
  for (const auto& r : m.rows) o << r.classifier << '\t' << fixed(r.report.auc) << '\t' << fixed(r.report.accuracy) << '\n';
  o << "baseline:" << m.baseline.label() << '\t' << fixed(m.baseline.report.auc) << '\t'
    << fixed(m.baseline.report.accuracy) << '\n';
  return o.str();
}

std::string keyword_ratios_tsv(const std::vector<features::KeywordRatio>& ratios) {
  std::ostringstream o;
  o << "rank\tkeyword\tratio\n";
  for (std::size_t i = 0; i < ratios.size(); ++i)
    o << i + 1 << '\t' << ratios[i].keyword << '\t' << fixed(ratios[i].ratio) << '\n';
  return o.str();
}

std::string candidates_tsv(const pipeline::BaseSignals& s) {
  std::ostringstream o;
  o << "family\tclassifier\tvariant\tauc\taccuracy\tf1\tselected\n";
  for (std::size_t i = 0; i < s.candidates.size(); ++i) {
    const auto& c = s.candidates[i];
    o << meta::to_string(c.family) << '\t' << c.classifier << '\t' << (c.variant.empty() ? "-" : c.variant) << '\t'
      << fixed(c.report.auc) << '\t' << fixed(c.report.accuracy) << '\t' << fixed(c.report.f1) << '\t'
      << (s.selected.at(c.family) == i ? "yes" : "no") << '\n';
  }
  return o.str();
}

std::string signals_csv(const pipeline::BaseSignals& s, const pipeline::Prepared& p) {
  std::ostringstream o;
  o << "instance,label";
  for (const auto sig : meta::all_signals()) o << ",p_" << meta::to_string(sig);
  o << '\n';
  for (std::size_t i = 0; i < s.bundles.size(); ++i) {
    o << s.bundles[i].instance_id << ',' << to_string(p.labels[i]);
    for (const auto sig : meta::all_signals()) o << ',' << fixed(*s.bundles[i].get(sig), 6);
    o << '\n';
  }
  return o.str();
}

std::string anomaly_csv(const pipeline::AnomalySignal& a, const pipeline::Prepared& p) {
  std::ostringstream o;
  o << "instance,label,eligible,z,p_sick\n";
  for (std::size_t i = 0; i < p.ids.size(); ++i)
    o << p.ids[i] << ',' << to_string(p.labels[i]) << ',' << (a.eligible[i] ? 1 : 0) << ',' << fixed(a.z[i], 6) << ','
      << fixed(a.probability[i], 6) << '\n';
  return o.str();
}

std::string diagnosis_histogram_tsv(const std::map<YearMonth, std::size_t>& h) {
  std::ostringstream o;
  o << "month\tdiagnoses\n";
  for (const auto& [m, n] : h) o << m.str() << '\t' << n << '\n';
  return o.str();
}

std::string keyword_scores_csv(const std::vector<std::pair<std::string, double>>& rows) {
  std::ostringstream o;
  o << "stem,score\n";
  for (const auto& [stem, score] : rows) o << stem << ',' << fixed(score, 6) << '\n';
  return o.str();
}

std::string roc_csv(const std::vector<NamedRoc>& curves) {
  std::ostringstream o;
  o << "series,fpr,tpr\n";
  for (const auto& [name, roc] : curves)
    for (const auto& pt : roc.curve) o << name << ',' << fixed(pt.fpr, 6) << ',' << fixed(pt.tpr, 6) << '\n';
  return o.str();
}

std::string roc_svg(const std::vector<NamedRoc>& curves, const std::string& title) {
  constexpr double kSize = 400, kMargin = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const auto x = [&](double fpr) { return fixed(kMargin + fpr * kSize, 2); };
  const auto y = [&](double tpr) { return fixed(kMargin + (1.0 - tpr) * kSize, 2); };
  std::ostringstream o;
  const double width = kSize + 2 * kMargin + 220, height = kSize + 2 * kMargin;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kMargin << "\" y=\"30\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize << "\" height=\"" << kSize
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(1) << "\" y2=\"" << y(1)
    << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    o << "<text x=\"" << x(v) << "\" y=\"" << fixed(kMargin + kSize + 16, 2) << "\" text-anchor=\"middle\">"
      << fixed(v, 2) << "</text>\n";
    o << "<text x=\"" << fixed(kMargin - 6, 2) << "\" y=\"" << y(v) << "\" text-anchor=\"end\">" << fixed(v, 2)
      << "</text>\n";
  }
  o << "<text x=\"" << fixed(kMargin + kSize / 2, 2) << "\" y=\"" << fixed(kMargin + kSize + 36, 2)
    << "\" text-anchor=\"middle\">false positive rate</text>\n";
  o << "<text x=\"15\" y=\"" << fixed(kMargin + kSize / 2, 2) << "\" transform=\"rotate(-90 15 "
    << fixed(kMargin + kSize / 2, 2) << ")\" text-anchor=\"middle\">true positive rate</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& [name, roc] = curves[c];
    const char* color = kColors[c % 10];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < roc.curve.size(); ++i)
      o << (i ? " " : "") << x(roc.curve[i].fpr) << ',' << y(roc.curve[i].tpr);
    o << "\"/>\n";
    const double ly = kMargin + 10 + 18 * static_cast<double>(c);
    o << "<line x1=\"" << fixed(kMargin + kSize + 15, 2) << "\" y1=\"" << fixed(ly, 2) << "\" x2=\""
      << fixed(kMargin + kSize + 35, 2) << "\" y2=\"" << fixed(ly, 2) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fixed(kMargin + kSize + 40, 2) << "\" y=\"" << fixed(ly + 4, 2) << "\">" << name << " ("
      << fixed(roc.auc, 3) << ")</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string coverage_tsv(const collector::CoverageReport& c, const collector::World& world) {
  std::ostringstream o;
  o << "account\tseed\ttweets_queries\tprofile_queries\tfollowers_queries\tmax_tweet_staleness_days\n";
  for (std::size_t a = 0; a < world.accounts.size(); ++a)
    o << world.accounts[a].account_id << '\t' << (world.accounts[a].is_seed ? 1 : 0) << '\t' << c.queries[a][0] << '\t'
      << c.queries[a][1] << '\t' << c.queries[a][2] << '\t' << fixed(c.max_tweet_staleness[a] / collector::kDay, 4)
      << '\n';
  o << "# fetched_tweets\t" << c.fetched << '\n';
  o << "# limit_violations\t" << c.limit_violations << '\n';
  o << "# requery_violations\t" << c.requery_violations << '\n';
  o << "# priority_violations\t" << c.priority_violations << '\n';
  o << "# max_seed_staleness_days\t" << fixed(c.max_seed_staleness / collector::kDay, 4) << '\n';
  o << "# seed_staleness_ceiling_days\t" << fixed(c.seed_staleness_ceiling / collector::kDay, 4) << '\n';
  return o.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace fluscope::report
