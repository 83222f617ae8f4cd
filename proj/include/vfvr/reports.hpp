#pragma once

// Analysis of trial logs into per-sequence summaries and the condition,
// technique and ANOVA tables.

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "vfvr/cli_io.hpp"
#include "vfvr/metrics.hpp"
#include "vfvr/stats.hpp"

namespace vfvr {

struct SequenceRow {
  int participant = 0;
  Condition condition;
  int sequence_idx = 0;
  SequenceSummary summary;
};

/// A summary measure: CSV column name and accessor.
struct Measure {
  const char* name;
  double SequenceSummary::*field;
};

inline constexpr std::array<Measure, 11> kMeasures{{{"mt_s", &SequenceSummary::mt_mean},
                                                    {"error_rate_pct", &SequenceSummary::error_rate},
                                                    {"throughput_bps", &SequenceSummary::throughput},
                                                    {"hand_m", &SequenceSummary::hand_movement},
                                                    {"head_m", &SequenceSummary::head_movement},
                                                    {"actual_depth_m", &SequenceSummary::actual_depth},
                                                    {"adj_visual_angle_deg", &SequenceSummary::adj_visual_angle},
                                                    {"d_e_m", &SequenceSummary::d_e},
                                                    {"sd_x_m", &SequenceSummary::sd_x},
                                                    {"w_e_m", &SequenceSummary::w_e},
                                                    {"id_e_bits", &SequenceSummary::id_e}}};

struct AnalysisCounts {
  std::size_t trials = 0;
  std::size_t outliers = 0;
  std::size_t sequences = 0;
  std::size_t invalid_sequences = 0;  // W_e = 0
  std::size_t skipped_sequences = 0;  // fewer than 3 usable trials
};

namespace detail {
using CellKey = std::tuple<std::size_t, double, double>;  // technique, width, diameter
inline CellKey cell_key(const Condition& c) { return {technique_index(c.technique), c.target_width, c.layout_diameter}; }
}  // namespace detail

/// Groups trials by (participant, condition, sequence) in sorted key order.
inline std::vector<SequenceRow> summarize_sequences(const std::vector<TrialRecord>& trials, AnalysisCounts* counts = nullptr) {
  using Key = std::tuple<int, std::size_t, double, double, int>;
  std::map<Key, std::vector<TrialRecord>> groups;
  AnalysisCounts n;
  for (const auto& t : trials) {
    groups[{t.participant, technique_index(t.condition.technique), t.condition.target_width,
            t.condition.layout_diameter, t.sequence_idx}]
        .push_back(t);
    ++n.trials;
  }
  std::vector<SequenceRow> out;
  for (const auto& [key, g] : groups) {
    SequenceRow row{std::get<0>(key), g.front().condition, std::get<4>(key), {}};
    try {
      row.summary = sequence_summary(g);
    } catch (const std::invalid_argument&) {
      ++n.skipped_sequences;
      for (const auto& t : g)
        if (classify_trial(t.selection_point, t.target_center, t.condition.target_width) == Outcome::Outlier)
          ++n.outliers;
      continue;
    }
    n.outliers += static_cast<std::size_t>(row.summary.n_outliers);
    if (!row.summary.valid) ++n.invalid_sequences;
    out.push_back(row);
  }
  n.sequences = out.size();
  if (counts) *counts = n;
  return out;
}

/// Participant × condition means of the sequence summaries (one row per cell).
inline std::vector<SequenceRow> participant_condition_means(const std::vector<SequenceRow>& seqs) {
  std::map<std::tuple<int, detail::CellKey>, std::pair<SequenceRow, int>> acc;
  for (const auto& s : seqs) {
    auto [it, fresh] = acc.try_emplace({s.participant, detail::cell_key(s.condition)}, s, 0);
    auto& [row, n] = it->second;
    if (fresh) {
      row.sequence_idx = -1;
      for (const auto& m : kMeasures) row.summary.*m.field = 0.0;
      row.summary.n_used = row.summary.n_outliers = 0;
    }
    for (const auto& m : kMeasures) row.summary.*m.field += s.summary.*m.field;
    row.summary.n_used += s.summary.n_used;
    row.summary.n_outliers += s.summary.n_outliers;
    row.summary.valid = row.summary.valid && s.summary.valid;
    ++n;
  }
  std::vector<SequenceRow> out;
  for (auto& [key, v] : acc) {
    auto& [row, n] = v;
    for (const auto& m : kMeasures) row.summary.*m.field /= n;
    out.push_back(row);
  }
  return out;
}

inline std::string summaries_csv(const std::vector<SequenceRow>& rows, bool with_sequence) {
  std::ostringstream out;
  out << "participant_id,technique,target_width_m,layout_diameter_m";
  if (with_sequence) out << ",sequence_idx";
  for (const auto& m : kMeasures) out << ',' << m.name;
  out << ",n_used,n_outliers,valid\n";
  for (const auto& r : rows) {
    out << r.participant << ',' << technique_name(r.condition.technique) << ',' << fmt_num(r.condition.target_width)
        << ',' << fmt_num(r.condition.layout_diameter);
    if (with_sequence) out << ',' << r.sequence_idx;
    for (const auto& m : kMeasures) out << ',' << fmt_num(r.summary.*m.field);
    out << ',' << r.summary.n_used << ',' << r.summary.n_outliers << ',' << (r.summary.valid ? 1 : 0) << '\n';
  }
  return out.str();
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  r.n = xs.size();
  if (xs.empty()) return r;
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  r.sd = sample_sd(xs);
  return r;
}

/// Condition means and SDs over sequences, keyed by condition.
inline std::map<detail::CellKey, std::vector<MeanSd>> condition_table(const std::vector<SequenceRow>& seqs) {
  std::map<detail::CellKey, std::vector<std::vector<double>>> vals;
  for (const auto& s : seqs) {
    auto& v = vals[detail::cell_key(s.condition)];
    v.resize(kMeasures.size());
    for (std::size_t m = 0; m < kMeasures.size(); ++m) v[m].push_back(s.summary.*kMeasures[m].field);
  }
  std::map<detail::CellKey, std::vector<MeanSd>> out;
  for (const auto& [k, v] : vals)
    for (const auto& xs : v) out[k].push_back(mean_sd(xs));
  return out;
}

/// Technique means and SDs over all sequences of a technique.
inline std::map<std::size_t, std::vector<MeanSd>> technique_table(const std::vector<SequenceRow>& seqs) {
  std::map<std::size_t, std::vector<std::vector<double>>> vals;
  for (const auto& s : seqs) {
    auto& v = vals[technique_index(s.condition.technique)];
    v.resize(kMeasures.size());
    for (std::size_t m = 0; m < kMeasures.size(); ++m) v[m].push_back(s.summary.*kMeasures[m].field);
  }
  std::map<std::size_t, std::vector<MeanSd>> out;
  for (const auto& [k, v] : vals)
    for (const auto& xs : v) out[k].push_back(mean_sd(xs));
  return out;
}

inline constexpr std::size_t kReportedMeasures = 7;  // the rows of the paper-style tables

/// Rows: measure; columns: technique M, SD.
inline std::string table2_csv(const std::vector<SequenceRow>& seqs) {
  const auto t = technique_table(seqs);
  std::ostringstream out;
  out << "measure";
  for (const auto& [k, v] : t) out << ',' << technique_name(kAllTechniques[k]) << "_M," << technique_name(kAllTechniques[k]) << "_SD";
  out << '\n';
  for (std::size_t m = 0; m < kReportedMeasures; ++m) {
    out << kMeasures[m].name;
    for (const auto& [k, v] : t) out << ',' << fmt_num(v[m].mean) << ',' << fmt_num(v[m].sd);
    out << '\n';
  }
  return out.str();
}

/// Rows: measure × target width; columns: technique × distance M, SD.
inline std::string table3_csv(const std::vector<SequenceRow>& seqs) {
  const auto t = condition_table(seqs);
  std::vector<std::pair<std::size_t, double>> cols;
  std::vector<double> widths;
  for (const auto& [k, v] : t) {
    const auto& [tech, w, d] = k;
    if (std::find(cols.begin(), cols.end(), std::pair{tech, d}) == cols.end()) cols.emplace_back(tech, d);
    if (std::find(widths.begin(), widths.end(), w) == widths.end()) widths.push_back(w);
  }
  std::sort(cols.begin(), cols.end());
  std::sort(widths.rbegin(), widths.rend());
  std::ostringstream out;
  out << "measure,target_width_m";
  for (const auto& [tech, d] : cols) {
    const std::string base = std::string(technique_name(kAllTechniques[tech])) + "_" + fmt_num(d) + "m";
    out << ',' << base << "_M," << base << "_SD";
  }
  out << '\n';
  for (std::size_t m = 0; m < kReportedMeasures; ++m)
    for (double w : widths) {
      out << kMeasures[m].name << ',' << fmt_num(w);
      for (const auto& [tech, d] : cols) {
        const auto it = t.find({tech, w, d});
        if (it == t.end()) out << ",,";
        else out << ',' << fmt_num(it->second[m].mean) << ',' << fmt_num(it->second[m].sd);
      }
      out << '\n';
    }
  return out.str();
}

/// MT on nominal ID per technique, one point per condition mean.
inline std::map<std::size_t, FittsFit> fitts_by_technique(const std::vector<SequenceRow>& seqs) {
  const auto t = condition_table(seqs);
  std::map<std::size_t, std::vector<std::pair<double, double>>> pts;
  for (const auto& [k, v] : t) {
    const auto& [tech, w, d] = k;
    pts[tech].emplace_back(index_of_difficulty(d, w), v[0].mean);
  }
  std::map<std::size_t, FittsFit> out;
  for (const auto& [tech, p] : pts) {
    try {
      out[tech] = fitts_regression(p);
    } catch (const std::invalid_argument&) {
      // a single ID level gives no slope; omitted from the report
    }
  }
  return out;
}

inline std::string fitts_csv(const std::vector<SequenceRow>& seqs) {
  std::ostringstream out;
  out << "technique,a_s,b_s_per_bit,r_squared\n";
  for (const auto& [tech, f] : fitts_by_technique(seqs))
    out << technique_name(kAllTechniques[tech]) << ',' << fmt_num(f.a) << ',' << fmt_num(f.b) << ','
        << fmt_num(f.r_squared) << '\n';
  return out.str();
}

inline std::string scatter_csv(const std::vector<TrialRecord>& trials) {
  std::ostringstream out;
  out << "technique,target_width_m,layout_diameter_m,participant_id,sequence_idx,trial_idx,select_x,select_y,rel_x,"
         "rel_y,outcome\n";
  for (const auto& t : trials) {
    const Outcome o = classify_trial(t.selection_point, t.target_center, t.condition.target_width);
    out << technique_name(t.condition.technique) << ',' << fmt_num(t.condition.target_width) << ','
        << fmt_num(t.condition.layout_diameter) << ',' << t.participant << ',' << t.sequence_idx << ',' << t.trial_idx
        << ',' << fmt_num(t.selection_point.x) << ',' << fmt_num(t.selection_point.y) << ','
        << fmt_num(t.selection_point.x - t.target_center.x) << ',' << fmt_num(t.selection_point.y - t.target_center.y)
        << ',' << outcome_name(o) << '\n';
  }
  return out.str();
}

inline std::string counts_json(const AnalysisCounts& c) {
  return Json{{"trials", c.trials},
              {"outliers", c.outliers},
              {"sequences", c.sequences},
              {"invalid_sequences", c.invalid_sequences},
              {"skipped_sequences", c.skipped_sequences}}
             .dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// ANOVA input and reports

/// Reads participant/technique/size/distance keys plus one response column.
inline std::vector<AnovaObservation> read_anova_observations(std::istream& in, const std::string& measure) {
  const CsvTable t = read_csv(in);
  const std::size_t cp = t.column("participant_id"), ct = t.column("technique"), cw = t.column("target_width_m"),
                    cd = t.column("layout_diameter_m"), cm = t.column(measure);
  std::vector<AnovaObservation> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    try {
      const double v = parse_num(c[cm]);
      if (!std::isfinite(v)) throw InputError(measure + " is not finite");
      out.push_back({c[cp], c[ct], c[cw], c[cd], v});
    } catch (const std::exception& e) {
      throw InputError("summaries row " + std::to_string(t.line[i]) + ": " + e.what());
    }
  }
  return out;
}

/// Three rows (F, p, η²) by treatment term, formatted like the published table.
inline std::string anova_table1_csv(const AnovaTable& tab, const std::string& measure) {
  const auto& terms = anova_treatment_terms();
  std::ostringstream out;
  out << "measure,stat,df_error";
  for (const auto& t : terms) out << ',' << t;
  out << '\n';
  const int dfe = tab.error().df;
  out << measure << ",F," << dfe;
  for (const auto& t : terms) out << ',' << fmt_fixed(tab.row(t).f, 2);
  out << '\n' << measure << ",p," << dfe;
  for (const auto& t : terms) out << ',' << format_p(tab.row(t).p);
  out << '\n' << measure << ",eta_squared," << dfe;
  for (const auto& t : terms) {
    const double e = tab.row(t).eta_squared;
    out << ',' << (e < 0.0005 && e >= 0 ? std::string("<0.001") : fmt_fixed(e, 3));
  }
  out << '\n';
  return out.str();
}

inline std::string anova_full_csv(const AnovaTable& tab) {
  std::ostringstream out;
  out << "term,ss,df,ms,f,p,eta_squared\n";
  for (const auto& r : tab.rows)
    out << r.term << ',' << fmt_num(r.ss) << ',' << r.df << ',' << fmt_num(r.ms) << ',' << fmt_num(r.f) << ','
        << fmt_num(r.p) << ',' << fmt_num(r.eta_squared) << '\n';
  return out.str();
}

/// Post hoc letters for the technique main effect.
inline std::string posthoc_csv(std::span<const AnovaObservation> obs, const AnovaTable& tab) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& o : obs) {
    auto& [s, n] = acc[o.technique];
    s += o.response;
    ++n;
  }
  std::vector<LevelMean> levels;
  int n_per = 0;
  for (const auto& [name, v] : acc) {
    levels.push_back({name, v.first / v.second});
    n_per = v.second;
  }
  const auto letters = posthoc_groups(levels, tab.error().ms, tab.error().df, n_per);
  std::ostringstream out;
  out << "technique,mean,group\n";
  for (std::size_t i = 0; i < levels.size(); ++i)
    out << levels[i].level << ',' << fmt_num(levels[i].mean) << ',' << letters[i] << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// NASA-TLX

struct TlxRow {
  std::string participant_id, technique, target_width_m, layout_diameter_m;
  TlxResponse response;
};

/// Columns: keys, the six ratings by scale name, then w_<scale> weights.
inline std::vector<TlxRow> read_tlx_responses(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t cp = t.column("participant_id"), ct = t.column("technique"), cw = t.column("target_width_m"),
                    cd = t.column("layout_diameter_m");
  std::array<std::size_t, 6> cr{}, cwt{};
  for (std::size_t k = 0; k < 6; ++k) {
    cr[k] = t.column(kTlxScales[k]);
    cwt[k] = t.column(std::string("w_") + kTlxScales[k]);
  }
  std::vector<TlxRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    try {
      TlxRow r{c[cp], c[ct], c[cw], c[cd], {}};
      for (std::size_t k = 0; k < 6; ++k) {
        r.response.ratings[k] = parse_num(c[cr[k]]);
        r.response.weights[k] = parse_int(c[cwt[k]]);
      }
      r.response.validate();
      out.push_back(r);
    } catch (const std::exception& e) {
      throw InputError("responses row " + std::to_string(t.line[i]) + ": " + e.what());
    }
  }
  return out;
}

inline std::string tlx_scores_csv(const std::vector<TlxRow>& rows) {
  std::ostringstream out;
  out << "participant_id,technique,target_width_m,layout_diameter_m,raw,weighted\n";
  for (const auto& r : rows)
    out << r.participant_id << ',' << r.technique << ',' << r.target_width_m << ',' << r.layout_diameter_m << ','
        << fmt_fixed(tlx_raw(r.response), 2) << ',' << fmt_fixed(tlx_weighted(r.response), 2) << '\n';
  return out.str();
}

}  // namespace vfvr
