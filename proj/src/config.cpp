#include "mpw/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace mpw {
namespace {

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

std::string index_path(const std::string& where, std::size_t i) {
  return where + "[" + std::to_string(i) + "]";
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
}

void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ConfigError(join(where, item.key()), "unknown key");
  }
}

const Json& field(const Json& j, const std::string& where, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(where, key), "missing required field");
  return *it;
}

double as_double(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where, "expected a finite number");
  return x;
}

std::uint64_t as_unsigned(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw ConfigError(where, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (x >= 0.0 && x < 0x1p64 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(where, "expected a nonnegative integer");
}

std::uint64_t key_as_unsigned(const std::string& key, const std::string& where) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(key.data(), key.data() + key.size(), v);
  if (r.ec != std::errc() || r.ptr != key.data() + key.size() || key.empty()) {
    throw ConfigError(where, "key must be a positive integer");
  }
  return v;
}

double number_field(const Json& j, const std::string& where, const char* key) {
  return as_double(field(j, where, key), join(where, key));
}

std::uint64_t unsigned_field(const Json& j, const std::string& where, const char* key) {
  return as_unsigned(field(j, where, key), join(where, key));
}

std::vector<std::pair<std::uint64_t, double>> weight_map(const Json& j, const std::string& where) {
  require_object(j, where);
  std::vector<std::pair<std::uint64_t, double>> out;
  for (const auto& item : j.items()) {
    const std::string at = join(where, item.key());
    out.emplace_back(key_as_unsigned(item.key(), at), as_double(item.value(), at));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Runs a factory and reports its validation message at `where`.
template <typename Fn>
auto build(const std::string& where, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where, e.what());
  }
}

std::vector<std::uint64_t> unsigned_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an array");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_unsigned(j[i], index_path(where, i)));
  return out;
}

std::vector<double> double_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], index_path(where, i)));
  return out;
}

}  // namespace

StepLaw parse_step_law(const Json& j, const std::string& where) {
  require_object(j, where);
  const Json& kind_json = field(j, where, "kind");
  if (!kind_json.is_string()) throw ConfigError(join(where, "kind"), "expected a string");
  const std::string kind = kind_json.get<std::string>();

  if (kind == "zeta") {
    allow_keys(j, where, {"kind", "alpha"});
    const double alpha = number_field(j, where, "alpha");
    return build(join(where, "alpha"), [&] { return StepLaw::zeta(alpha); });
  }
  if (kind == "geometric") {
    allow_keys(j, where, {"kind", "beta"});
    const double beta = number_field(j, where, "beta");
    return build(join(where, "beta"), [&] { return StepLaw::geometric(beta); });
  }
  if (kind == "trunc_poisson") {
    allow_keys(j, where, {"kind", "lambda"});
    const double lambda = number_field(j, where, "lambda");
    return build(join(where, "lambda"), [&] { return StepLaw::trunc_poisson(lambda); });
  }
  if (kind == "prime_power_heavy") {
    allow_keys(j, where, {"kind", "weights", "tail_exponent"});
    auto weights = weight_map(field(j, where, "weights"), join(where, "weights"));
    const double tail = j.contains("tail_exponent") ? number_field(j, where, "tail_exponent") : 2.0;
    return build(where, [&] { return StepLaw::prime_power_heavy(weights, tail); });
  }
  if (kind == "pareto_exponent") {
    allow_keys(j, where, {"kind", "prime", "alpha"});
    const std::uint64_t prime = unsigned_field(j, where, "prime");
    const double alpha = number_field(j, where, "alpha");
    return build(where, [&] { return StepLaw::pareto_exponent(prime, alpha); });
  }
  if (kind == "degenerate") {
    allow_keys(j, where, {"kind", "value"});
    const std::uint64_t value = unsigned_field(j, where, "value");
    return build(join(where, "value"), [&] { return StepLaw::degenerate(value); });
  }
  if (kind == "table") {
    allow_keys(j, where, {"kind", "pmf"});
    auto pmf = weight_map(field(j, where, "pmf"), join(where, "pmf"));
    return build(join(where, "pmf"), [&] { return StepLaw::table(pmf); });
  }
  if (kind == "product") {
    allow_keys(j, where, {"kind", "factors"});
    const std::string at = join(where, "factors");
    const Json& f = field(j, where, "factors");
    if (!f.is_array()) throw ConfigError(at, "expected an array");
    std::vector<StepLaw> factors;
    for (std::size_t i = 0; i < f.size(); ++i) factors.push_back(parse_step_law(f[i], index_path(at, i)));
    return build(at, [&] { return StepLaw::product(factors); });
  }
  throw ConfigError(join(where, "kind"), "unknown law kind '" + kind + "'");
}

JointStepLaw parse_joint_law(const Json& j, const std::filesystem::path& base_dir,
                             const std::string& where) {
  require_object(j, where);
  const Json& c = field(j, where, "coupling");
  if (!c.is_string()) throw ConfigError(join(where, "coupling"), "expected a string");
  const std::string coupling = c.get<std::string>();

  if (coupling == "independent") {
    allow_keys(j, where, {"coupling", "xi", "eta"});
    return JointStepLaw::independent(parse_step_law(field(j, where, "xi"), join(where, "xi")),
                                     parse_step_law(field(j, where, "eta"), join(where, "eta")));
  }
  if (coupling == "identical") {
    allow_keys(j, where, {"coupling", "law"});
    return JointStepLaw::identical(parse_step_law(field(j, where, "law"), join(where, "law")));
  }
  if (coupling == "xi_one") {
    allow_keys(j, where, {"coupling", "eta"});
    return JointStepLaw::xi_degenerate_one(
        parse_step_law(field(j, where, "eta"), join(where, "eta")));
  }
  if (coupling == "joint_table") {
    allow_keys(j, where, {"coupling", "csv", "atoms"});
    if (j.contains("csv") == j.contains("atoms")) {
      throw ConfigError(where, "joint_table needs exactly one of 'csv' or 'atoms'");
    }
    if (j.contains("csv")) {
      const std::string at = join(where, "csv");
      if (!j["csv"].is_string()) throw ConfigError(at, "expected a path string");
      std::filesystem::path path = j["csv"].get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      std::ifstream in(path);
      if (!in) throw ConfigError(at, "cannot open " + path.string());
      return build(at, [&] { return parse_joint_table_csv(in); });
    }
    const std::string at = join(where, "atoms");
    const Json& a = j["atoms"];
    if (!a.is_array()) throw ConfigError(at, "expected an array of [xi, eta, mass]");
    std::vector<JointAtom> atoms;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string ai = index_path(at, i);
      if (!a[i].is_array() || a[i].size() != 3) throw ConfigError(ai, "expected [xi, eta, mass]");
      atoms.push_back({as_unsigned(a[i][0], ai + "[0]"), as_unsigned(a[i][1], ai + "[1]"),
                       as_double(a[i][2], ai + "[2]")});
    }
    return build(at, [&] { return JointStepLaw::joint_table(atoms); });
  }
  throw ConfigError(join(where, "coupling"), "unknown coupling '" + coupling + "'");
}

ExperimentConfig parse_experiment_config(const Json& j, const std::filesystem::path& base_dir) {
  require_object(j, "");
  allow_keys(j, "", {"theorem", "law", "t", "u_grid", "primes", "replicas", "seed", "tolerances",
                     "extreme", "prime_limit"});
  const Json& th = field(j, "", "theorem");
  if (!th.is_string()) throw ConfigError("theorem", "expected a string");

  ExperimentConfig c{build("theorem", [&] { return theorem_from_string(th.get<std::string>()); }),
                     parse_joint_law(field(j, "", "law"), base_dir, "law")};
  c.t = number_field(j, "", "t");
  c.u_grid = double_list(field(j, "", "u_grid"), "u_grid");
  c.replicas = unsigned_field(j, "", "replicas");
  c.seed = unsigned_field(j, "", "seed");
  if (j.contains("primes")) c.primes = unsigned_list(j["primes"], "primes");
  if (j.contains("prime_limit")) c.prime_limit = unsigned_field(j, "", "prime_limit");
  if (j.contains("tolerances")) {
    const Json& tol = j["tolerances"];
    require_object(tol, "tolerances");
    allow_keys(tol, "tolerances", {"ks_alpha", "sigma_band"});
    if (tol.contains("ks_alpha")) c.tolerances.ks_alpha = number_field(tol, "tolerances", "ks_alpha");
    if (tol.contains("sigma_band")) {
      c.tolerances.sigma_band = number_field(tol, "tolerances", "sigma_band");
    }
  }
  if (j.contains("extreme")) {
    const Json& ex = j["extreme"];
    require_object(ex, "extreme");
    allow_keys(ex, "extreme", {"r_min", "oracle_factor"});
    if (ex.contains("r_min")) c.extreme.r_min = number_field(ex, "extreme", "r_min");
    if (ex.contains("oracle_factor")) {
      c.extreme.oracle_factor = number_field(ex, "extreme", "oracle_factor");
    }
  }
  build("", [&] {
    validate(c);
    return 0;
  });
  return c;
}

Json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("", "cannot open " + file.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", file.string() + ": " + e.what());
  }
}

}  // namespace mpw
