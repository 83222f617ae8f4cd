#pragma once

// Participant-blocked three-factor ANOVA and the F-distribution tail it needs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfvr {

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
inline double ibeta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("ibeta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("ibeta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::ibeta_cf(a, b, x) / a;
  return 1.0 - front * detail::ibeta_cf(b, a, 1.0 - x) / b;
}

/// Upper-tail probability of the F distribution.
inline double f_p_value(double f, double df1, double df2) {
  if (!(df1 >= 1.0) || !(df2 >= 1.0)) throw std::domain_error("f_p_value: df must be >= 1");
  if (std::isnan(f) || f < 0.0) throw std::domain_error("f_p_value: F must be >= 0");
  if (std::isinf(f)) return 0.0;
  if (f == 0.0) return 1.0;
  // P(F > f) = I_{df2 / (df2 + df1 f)}(df2/2, df1/2)
  const double x = df2 / (df2 + df1 * f);
  return std::clamp(regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, x), 0.0, 1.0);
}

/// "<0.001" below one in a thousand, else three decimals.
inline std::string format_p(double p) {
  if (std::isnan(p)) return "NaN";
  if (p < 0.001) return "<0.001";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  return buf;
}

struct AnovaObservation {
  std::string participant;
  std::string technique;  // TQ
  std::string size;       // TS
  std::string distance;   // TD
  double response = 0.0;
};

struct AnovaRow {
  std::string term;
  double ss = 0.0;
  int df = 0;
  double ms = 0.0;
  double f = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double eta_squared = 0.0;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;  // Participant, 7 treatment terms, Error, Total
  int replicates = 0;

  const AnovaRow& row(const std::string& term) const {
    for (const auto& r : rows)
      if (r.term == term) return r;
    throw std::out_of_range("no ANOVA term " + term);
  }
  const AnovaRow& error() const { return row("Error"); }
  const AnovaRow& total() const { return row("Total"); }
};

inline const std::vector<std::string>& anova_treatment_terms() {
  static const std::vector<std::string> t{"TQ", "TS", "TD", "TQxTS", "TQxTD", "TSxTD", "TQxTSxTD"};
  return t;
}

namespace detail {
inline std::map<std::string, int> level_index(std::span<const AnovaObservation> rows,
                                              std::string AnovaObservation::*field) {
  std::map<std::string, int> idx;
  for (const auto& r : rows) idx.emplace(r.*field, 0);
  int k = 0;
  for (auto& [name, i] : idx) i = k++;
  return idx;
}
}  // namespace detail

/// Fixed-effects ANOVA with a participant block and all treatment
/// interactions, balanced designs only.
inline AnovaTable anova_blocked(std::span<const AnovaObservation> obs) {
  if (obs.empty()) throw std::invalid_argument("anova: no observations");
  const auto pi = detail::level_index(obs, &AnovaObservation::participant);
  const auto ai = detail::level_index(obs, &AnovaObservation::technique);
  const auto bi = detail::level_index(obs, &AnovaObservation::size);
  const auto ci = detail::level_index(obs, &AnovaObservation::distance);
  const int P = static_cast<int>(pi.size()), A = static_cast<int>(ai.size()),
            B = static_cast<int>(bi.size()), C = static_cast<int>(ci.size());

  const auto cell = [&](int p, int a, int b, int c) { return ((p * A + a) * B + b) * C + c; };
  std::vector<int> count(static_cast<std::size_t>(P * A * B * C), 0);
  std::vector<double> sum(count.size(), 0.0);
  for (const auto& o : obs) {
    if (!std::isfinite(o.response)) throw std::invalid_argument("anova: non-finite response");
    const int k = cell(pi.at(o.participant), ai.at(o.technique), bi.at(o.size), ci.at(o.distance));
    ++count[static_cast<std::size_t>(k)];
    sum[static_cast<std::size_t>(k)] += o.response;
  }
  const int r = count.front();
  if (r < 1 || std::any_of(count.begin(), count.end(), [r](int n) { return n != r; }))
    throw std::invalid_argument("anova: unbalanced design (unequal replicates per participant x cell)");

  const double N = static_cast<double>(obs.size());
  const double grand = std::accumulate(sum.begin(), sum.end(), 0.0) / N;

  // Marginal means via accumulation over the (p, a, b, c) cell sums.
  std::vector<double> mp(P, 0.0), ma(A, 0.0), mb(B, 0.0), mc(C, 0.0);
  std::vector<double> mab(A * B, 0.0), mac(A * C, 0.0), mbc(B * C, 0.0), mabc(A * B * C, 0.0);
  for (int p = 0; p < P; ++p)
    for (int a = 0; a < A; ++a)
      for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
          const double s = sum[static_cast<std::size_t>(cell(p, a, b, c))];
          mp[p] += s;
          ma[a] += s;
          mb[b] += s;
          mc[c] += s;
          mab[a * B + b] += s;
          mac[a * C + c] += s;
          mbc[b * C + c] += s;
          mabc[(a * B + b) * C + c] += s;
        }
  const double rr = r;
  for (auto& v : mp) v /= A * B * C * rr;
  for (auto& v : ma) v /= P * B * C * rr;
  for (auto& v : mb) v /= P * A * C * rr;
  for (auto& v : mc) v /= P * A * B * rr;
  for (auto& v : mab) v /= P * C * rr;
  for (auto& v : mac) v /= P * B * rr;
  for (auto& v : mbc) v /= P * A * rr;
  for (auto& v : mabc) v /= P * rr;

  const auto sq = [](double x) { return x * x; };
  double ss_p = 0, ss_a = 0, ss_b = 0, ss_c = 0, ss_ab = 0, ss_ac = 0, ss_bc = 0, ss_abc = 0;
  for (int p = 0; p < P; ++p) ss_p += sq(mp[p] - grand);
  for (int a = 0; a < A; ++a) ss_a += sq(ma[a] - grand);
  for (int b = 0; b < B; ++b) ss_b += sq(mb[b] - grand);
  for (int c = 0; c < C; ++c) ss_c += sq(mc[c] - grand);
  for (int a = 0; a < A; ++a)
    for (int b = 0; b < B; ++b) {
      ss_ab += sq(mab[a * B + b] - ma[a] - mb[b] + grand);
      for (int c = 0; c < C; ++c)
        ss_abc += sq(mabc[(a * B + b) * C + c] - mab[a * B + b] - mac[a * C + c] - mbc[b * C + c] +
                     ma[a] + mb[b] + mc[c] - grand);
    }
  for (int a = 0; a < A; ++a)
    for (int c = 0; c < C; ++c) ss_ac += sq(mac[a * C + c] - ma[a] - mc[c] + grand);
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) ss_bc += sq(mbc[b * C + c] - mb[b] - mc[c] + grand);
  ss_p *= A * B * C * rr;
  ss_a *= P * B * C * rr;
  ss_b *= P * A * C * rr;
  ss_c *= P * A * B * rr;
  ss_ab *= P * C * rr;
  ss_ac *= P * B * rr;
  ss_bc *= P * A * rr;
  ss_abc *= P * rr;

  double ss_total = 0.0;
  for (const auto& o : obs) ss_total += sq(o.response - grand);

  AnovaTable t;
  t.replicates = r;
  const int dfa = A - 1, dfb = B - 1, dfc = C - 1;
  t.rows = {{"Participant", ss_p, P - 1},  {"TQ", ss_a, dfa},
            {"TS", ss_b, dfb},             {"TD", ss_c, dfc},
            {"TQxTS", ss_ab, dfa * dfb},   {"TQxTD", ss_ac, dfa * dfc},
            {"TSxTD", ss_bc, dfb * dfc},   {"TQxTSxTD", ss_abc, dfa * dfb * dfc}};
  double ss_model = 0.0;
  int df_model = 0;
  for (const auto& row : t.rows) {
    ss_model += row.ss;
    df_model += row.df;
  }
  const int df_total = static_cast<int>(obs.size()) - 1;
  const int df_error = df_total - df_model;
  if (df_error < 1) throw std::invalid_argument("anova: no residual degrees of freedom");
  double ss_error = ss_total - ss_model;
  if (std::abs(ss_error) < 1e-12 * ss_total) ss_error = 0.0;
  const double ms_error = ss_error / df_error;

  for (auto& row : t.rows) {
    row.ms = row.df > 0 ? row.ss / row.df : 0.0;
    if (row.df == 0 || (row.ms == 0.0 && ms_error == 0.0)) {
      row.f = std::numeric_limits<double>::quiet_NaN();
      row.p = 1.0;
    } else {
      row.f = ms_error > 0.0 ? row.ms / ms_error : std::numeric_limits<double>::infinity();
      row.p = f_p_value(row.f, row.df, df_error);
    }
    row.eta_squared = ss_total > 0.0 ? row.ss / ss_total : std::numeric_limits<double>::quiet_NaN();
  }
  AnovaRow err{"Error", ss_error, df_error, ms_error};
  err.eta_squared = ss_total > 0.0 ? ss_error / ss_total : std::numeric_limits<double>::quiet_NaN();
  t.rows.push_back(err);
  AnovaRow tot{"Total", ss_total, df_total, ss_total / df_total};
  tot.eta_squared = ss_total > 0.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  t.rows.push_back(tot);
  return t;
}

struct LevelMean {
  std::string level;
  double mean = 0.0;
};

/// Bonferroni all-pairs comparisons on a pooled error term. Levels joined by a
/// non-significant pair (transitively) share a letter; letters go out in
/// descending-mean order. Output is aligned with the input order.
inline std::vector<std::string> posthoc_groups(std::span<const LevelMean> cells, double ms_error,
                                               int df_error, double n_per_level, double alpha = 0.05) {
  const std::size_t k = cells.size();
  if (k < 2) throw std::invalid_argument("posthoc_groups: needs at least two levels");
  if (!(n_per_level > 0.0) || df_error < 1) throw std::invalid_argument("posthoc_groups: bad n or df");
  const double pairs = k * (k - 1) / 2.0;
  const double se = std::sqrt(2.0 * ms_error / n_per_level);

  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double diff = std::abs(cells[i].mean - cells[j].mean);
      bool significant;
      if (se > 0.0) {
        const double t = diff / se;
        significant = f_p_value(t * t, 1.0, df_error) < alpha / pairs;
      } else {
        significant = diff > 0.0;
      }
      if (!significant) parent[find(i)] = find(j);
    }

  std::vector<std::size_t> by_mean(k);
  std::iota(by_mean.begin(), by_mean.end(), 0);
  std::stable_sort(by_mean.begin(), by_mean.end(),
                   [&](std::size_t a, std::size_t b) { return cells[a].mean > cells[b].mean; });
  std::map<std::size_t, std::string> letter_of_root;
  std::vector<std::string> out(k);
  for (std::size_t i : by_mean) {
    const std::size_t root = find(i);
    auto it = letter_of_root.find(root);
    if (it == letter_of_root.end()) {
      const std::size_t n = letter_of_root.size();
      std::string letter(1, static_cast<char>('A' + n % 26));
      if (n >= 26) letter += std::to_string(n / 26);
      it = letter_of_root.emplace(root, letter).first;
    }
    out[i] = it->second;
  }
  return out;
}

}  // namespace vfvr
