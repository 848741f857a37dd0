#include "mpw/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mpw {
namespace {

Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

Json numbers(const std::vector<double>& xs) {
  Json a = Json::array();
  for (const double x : xs) a.push_back(number(x));
  return a;
}

Json ks_json(const KsResult& k) {
  Json j;
  j["statistic"] = number(k.statistic);
  j["p_value"] = number(k.p_value);
  j["n"] = k.n;
  if (k.n_reference > 0) j["n_reference"] = k.n_reference;
  j["ties"] = k.ties;
  return j;
}

std::string pass_word(bool asserted, bool passed) {
  if (!asserted) return "report";
  return passed ? "pass" : "FAIL";
}

std::string fixed(double x, int precision = 4) {
  if (std::isnan(x)) return "-";
  std::ostringstream s;
  if (x != 0.0 && (std::fabs(x) < 1e-3 || std::fabs(x) >= 1e6)) {
    s << std::scientific << std::setprecision(precision - 1) << x;
  } else {
    s << std::fixed << std::setprecision(precision) << x;
  }
  return s.str();
}

std::string prime_label(std::uint64_t p) { return p == 0 ? "-" : std::to_string(p); }

// Leading `left` and trailing `tail` columns are left-aligned, the rest right-aligned.
class Table {
 public:
  Table(std::vector<std::string> header, std::size_t left, std::size_t tail)
      : left_(left), tail_(tail) {
    rows_.push_back(std::move(header));
  }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out) const {
    const std::size_t n = rows_.front().size();
    std::vector<std::size_t> width(n, 0);
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < n; ++i) width[i] = std::max(width[i], row[i].size());
    }
    for (const auto& row : rows_) {
      std::string line;
      for (std::size_t i = 0; i < n; ++i) {
        const bool last = i + 1 == n;
        const std::string pad(width[i] - row[i].size(), ' ');
        if (i > 0) line += "  ";
        if (i < left_ || i + tail_ >= n) {
          line += row[i];
          if (!last) line += pad;
        } else {
          line += pad + row[i];
        }
      }
      out << line << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
  std::size_t left_, tail_;
};

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

Json to_json(const Main2ConditionReport& r) {
  Json j;
  j["prime_limit"] = r.prime_limit;
  j["second_moment_partial_sum"] = number(r.second_moment_partial_sum);
  j["eta_log_second_moment_finite"] = r.eta_log_second_moment_finite;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json x;
    x["n"] = row.n;
    x["frequent_max_prime"] = row.frequent_max_prime;
    x["frequent_count"] = row.frequent_count;
    x["remainder_eta"] = number(row.remainder_eta);
    x["ratio_eta"] = number(row.ratio_eta);
    x["remainder_diff"] = number(row.remainder_diff);
    x["ratio_diff"] = number(row.ratio_diff);
    rows.push_back(std::move(x));
  }
  j["rows"] = std::move(rows);
  j["trend_eta"] = to_string(r.trend_eta);
  j["trend_diff"] = to_string(r.trend_diff);
  j["verdict"] = r.verdict;
  return j;
}

Json to_json(const ExperimentReport& r) {
  Json j;
  j["theorem"] = r.theorem;
  j["law"] = r.law;
  j["t"] = r.t;
  j["u_grid"] = numbers(r.u_grid);
  j["primes"] = r.primes;
  j["replicas"] = r.replicas;
  j["seed"] = r.seed;
  j["tolerances"] = {{"ks_alpha", r.tolerances.ks_alpha},
                     {"sigma_band", r.tolerances.sigma_band}};
  j["extreme"] = {{"r_min", r.extreme.r_min}, {"oracle_factor", r.extreme.oracle_factor}};
  j["status"] = r.status;
  j["hypothesis_met"] = r.hypothesis_met;
  j["mu_xi"] = number(r.mu_xi);
  j["sigma2_xi"] = number(r.sigma2_xi);
  j["notes"] = r.notes;

  Json ks = Json::array();
  for (const auto& k : r.ks_checks) {
    Json x;
    x["statistic"] = k.statistic;
    x["p"] = k.prime;
    x["u"] = k.u;
    x["target"] = k.target;
    x["sample_mean"] = number(k.sample_mean);
    x["sample_variance"] = number(k.sample_variance);
    x["target_mean"] = number(k.target_mean);
    x["target_variance"] = number(k.target_variance);
    x["ks"] = ks_json(k.ks);
    x["ks_p"] = number(k.ks.p_value);
    x["asserted"] = k.asserted;
    x["passed"] = k.passed;
    ks.push_back(std::move(x));
  }
  j["ks_checks"] = std::move(ks);

  Json cov = Json::array();
  for (const auto& c : r.covariance_checks) {
    Json x;
    x["statistic"] = c.statistic;
    x["p"] = c.p;
    x["q"] = c.q;
    x["u"] = c.u;
    x["v"] = c.v;
    x["empirical"] = number(c.empirical);
    x["predicted"] = number(c.predicted);
    x["standard_error"] = number(c.standard_error);
    x["asserted"] = c.asserted;
    x["passed"] = c.passed;
    cov.push_back(std::move(x));
  }
  j["covariance_checks"] = std::move(cov);

  Json qs = Json::array();
  for (const auto& q : r.quantile_checks) {
    Json x;
    x["statistic"] = q.statistic;
    x["p"] = q.prime;
    x["u"] = q.u;
    x["steps"] = q.steps;
    x["level"] = q.level;
    x["value"] = number(q.value);
    x["threshold"] = number(q.threshold);
    x["asserted"] = q.asserted;
    x["passed"] = q.passed;
    qs.push_back(std::move(x));
  }
  j["quantile_checks"] = std::move(qs);

  j["conditions"] = r.conditions ? to_json(*r.conditions) : Json(nullptr);
  return j;
}

void write_report_text(std::ostream& out, const ExperimentReport& r) {
  out << "theorem    " << r.theorem << '\n';
  out << "law        " << r.law << '\n';
  out << "t          " << format_double(r.t) << '\n';
  out << "u grid    ";
  for (const double u : r.u_grid) out << ' ' << format_double(u);
  out << '\n';
  out << "primes    ";
  for (const auto p : r.primes) out << ' ' << p;
  out << '\n';
  out << "replicas   " << r.replicas << '\n';
  out << "seed       " << r.seed << '\n';
  out << "mu_xi      " << fixed(r.mu_xi, 6) << '\n';
  out << "sigma2_xi  " << fixed(r.sigma2_xi, 6) << '\n';
  out << "status     " << r.status;
  if (!r.hypothesis_met) out << " (hypothesis unmet)";
  out << '\n';

  if (!r.ks_checks.empty()) {
    out << "\nKS checks\n";
    Table t({"statistic", "p", "u", "mean", "target", "var", "target", "D", "p-value", "result",
             "reference"},
            3, 2);
    for (const auto& k : r.ks_checks) {
      t.add({k.statistic, prime_label(k.prime), format_double(k.u), fixed(k.sample_mean),
             fixed(k.target_mean), fixed(k.sample_variance), fixed(k.target_variance),
             fixed(k.ks.statistic), fixed(k.ks.p_value), pass_word(k.asserted, k.passed),
             k.target + (k.ks.ties ? " [ties: mid-ECDF]" : "")});
    }
    t.print(out);
  }

  if (!r.covariance_checks.empty()) {
    out << "\nCovariance checks\n";
    Table t({"statistic", "p", "q", "u", "v", "empirical", "predicted", "std.err", "result"}, 5, 1);
    for (const auto& c : r.covariance_checks) {
      t.add({c.statistic, prime_label(c.p), prime_label(c.q), format_double(c.u),
             format_double(c.v), fixed(c.empirical), fixed(c.predicted), fixed(c.standard_error),
             pass_word(c.asserted, c.passed)});
    }
    t.print(out);
  }

  if (!r.quantile_checks.empty()) {
    out << "\nQuantile checks\n";
    Table t({"statistic", "p", "u", "steps", "level", "value", "threshold", "result"}, 3, 1);
    for (const auto& q : r.quantile_checks) {
      t.add({q.statistic, prime_label(q.prime), format_double(q.u), std::to_string(q.steps),
             format_double(q.level), fixed(q.value), fixed(q.threshold),
             pass_word(q.asserted, q.passed)});
    }
    t.print(out);
  }

  if (r.conditions) {
    const auto& c = *r.conditions;
    out << "\nCondition check (p <= " << c.prime_limit << "): trend_eta "
        << to_string(c.trend_eta) << ", trend_diff " << to_string(c.trend_diff) << ", verdict "
        << c.verdict << '\n';
  }

  if (!r.notes.empty()) {
    out << "\nNotes\n";
    for (const auto& n : r.notes) out << "  " << n << '\n';
  }
}

void write_conditions_text(std::ostream& out, const Main2ConditionReport& r, const StepLaw& xi) {
  const auto* zeta = xi.as<ZetaLaw>();
  out << "prime limit              " << r.prime_limit << '\n';
  out << "sum E[ln^2 eta] partial  " << fixed(r.second_moment_partial_sum, 6)
      << (r.eta_log_second_moment_finite ? "  (finite)" : "  (diverges)") << '\n';
  out << '\n'
      << std::right << std::setw(12) << "n" << std::setw(10) << "P1 max" << std::setw(8)
      << "|P1|";
  if (zeta) out << std::setw(12) << "n^(1/2a)";
  out << std::setw(14) << "rem_eta" << std::setw(14) << "ratio_eta" << std::setw(14)
      << "rem_diff" << std::setw(14) << "ratio_diff" << '\n';
  for (const auto& row : r.rows) {
    out << std::setw(12) << row.n << std::setw(10) << row.frequent_max_prime << std::setw(8)
        << row.frequent_count;
    if (zeta) {
      out << std::setw(12) << fixed(std::pow(static_cast<double>(row.n), 0.5 / zeta->alpha), 2);
    }
    out << std::setw(14) << fixed(row.remainder_eta) << std::setw(14) << fixed(row.ratio_eta)
        << std::setw(14) << fixed(row.remainder_diff) << std::setw(14) << fixed(row.ratio_diff)
        << '\n';
  }
  out << "\ntrend_eta   " << to_string(r.trend_eta) << '\n';
  out << "trend_diff  " << to_string(r.trend_diff) << '\n';
  out << "verdict     " << r.verdict << '\n';
}

void write_plot_csv(std::ostream& out, const ExperimentReport& r) {
  out << "statistic,p,u,x,empirical_cdf,oracle_cdf\n";
  for (const auto& s : r.plots) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << s.statistic << ',' << s.prime << ',' << format_double(s.u) << ','
          << format_double(s.x[i]) << ',' << format_double(s.empirical_cdf[i]) << ','
          << format_double(s.oracle_cdf[i]) << '\n';
    }
  }
}

void write_replica_csv(std::ostream& out, const ExperimentReport& r) {
  out << "replica";
  for (const auto& c : r.replica_table.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < r.replica_table.rows.size(); ++i) {
    out << i;
    for (const double v : r.replica_table.rows[i]) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace mpw
