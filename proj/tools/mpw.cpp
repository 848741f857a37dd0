// mpw: sample laws, run walks and experiments, check the main2 conditions.
//
// Exit codes: 0 pass or advisory, 1 an asserted check failed, 2 usage or config error.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "mpw/config.hpp"
#include "mpw/distributions.hpp"
#include "mpw/limit_lab.hpp"
#include "mpw/report.hpp"
#include "mpw/walks.hpp"

namespace fs = std::filesystem;
using namespace mpw;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream s;
  for (unsigned i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return s.str();
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::uint64_t parse_env_unsigned(const char* name) {
  const char* v = std::getenv(name);
  std::uint64_t out = 0;
  const std::string s = v;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw UsageError(std::string(name) + " must be a nonnegative integer, got '" + s + "'");
  }
  return out;
}

// Flag beats environment beats config.
template <typename T>
void apply_override(T& value, const char* env, const std::optional<T>& flag) {
  if (std::getenv(env)) value = static_cast<T>(parse_env_unsigned(env));
  if (flag) value = *flag;
}

Json parse_inline_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(what, e.what());
  }
}

// Either a bare joint-law document or an experiment config holding one under "law".
JointStepLaw joint_law_from(const std::string& config_path, const std::string& law_json) {
  if (config_path.empty() == law_json.empty()) {
    throw UsageError("give exactly one of --config or --law-json");
  }
  if (!law_json.empty()) return parse_joint_law(parse_inline_json(law_json, "law-json"));
  const Json doc = read_json_file(config_path);
  const fs::path base = fs::path(config_path).parent_path();
  if (doc.is_object() && doc.contains("coupling")) return parse_joint_law(doc, base, "");
  if (doc.is_object() && doc.contains("law")) return parse_joint_law(doc["law"], base, "law");
  throw ConfigError("", "expected a joint law or a document with a 'law' field");
}

void require_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (format == a) return;
  }
  throw UsageError("unsupported --format '" + format + "' for this command");
}

// ---------------------------------------------------------------------------

struct SampleArgs {
  std::string law;
  std::optional<double> alpha, beta, lambda, tail_exponent;
  std::optional<std::uint64_t> value, prime;
  std::string weights;
  std::string law_json;
  std::uint64_t count = 1;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
};

Json weights_json(const std::string& text) {
  // "2:0.5,3:0.5"
  Json w = Json::object();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("weights", "expected prime:weight pairs");
    try {
      w[item.substr(0, colon)] = std::stod(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("weights", "bad weight in '" + item + "'");
    }
  }
  return w;
}

StepLaw sample_law(const SampleArgs& a) {
  if (a.law.empty() == a.law_json.empty()) throw UsageError("give exactly one of --law or --law-json");
  if (!a.law_json.empty()) return parse_step_law(parse_inline_json(a.law_json, "law-json"));
  Json doc{{"kind", a.law}};
  if (a.alpha) doc["alpha"] = *a.alpha;
  if (a.beta) doc["beta"] = *a.beta;
  if (a.lambda) doc["lambda"] = *a.lambda;
  if (a.tail_exponent) doc["tail_exponent"] = *a.tail_exponent;
  if (a.value) doc["value"] = *a.value;
  if (a.prime) doc["prime"] = *a.prime;
  if (!a.weights.empty()) {
    doc[a.law == "table" ? "pmf" : "weights"] = weights_json(a.weights);
  }
  return parse_step_law(doc);
}

// Decimal value, or p^k*q^l when the draw exceeds 64 bits.
std::string render_draw(const std::vector<PrimePower>& f) {
  if (const auto v = PrimeExponentVector::from_sorted(f).to_integer()) return std::to_string(*v);
  std::string s;
  for (const auto& pp : f) {
    if (!s.empty()) s += '*';
    s += std::to_string(pp.prime) + '^' + std::to_string(pp.exponent);
  }
  return s;
}

int cmd_sample(const SampleArgs& a) {
  require_format(a.format, {"text", "csv", "json"});
  const StepLaw law = sample_law(a);
  std::uint64_t seed = 1;
  apply_override(seed, "MPW_SEED", a.seed);
  RandomStream rng = RandomStream::derive(seed, 0);
  std::vector<PrimePower> f;
  std::vector<std::string> draws;
  draws.reserve(a.count);
  for (std::uint64_t i = 0; i < a.count; ++i) {
    sample_factors(law, rng, f);
    draws.push_back(render_draw(f));
  }
  if (a.format == "json") {
    Json out = Json::array();
    for (const auto& d : draws) out.push_back(d);
    std::cout << Json{{"law", law.describe()}, {"seed", seed}, {"draws", out}}.dump(2) << '\n';
  } else {
    if (a.format == "csv") std::cout << "index,value\n";
    for (std::size_t i = 0; i < draws.size(); ++i) {
      if (a.format == "csv") std::cout << i << ',';
      std::cout << draws[i] << '\n';
    }
  }
  return kExitPass;
}

// ---------------------------------------------------------------------------

struct WalkArgs {
  std::string config;
  std::string law_json;
  std::uint64_t n = 0;
  std::optional<std::uint64_t> seed;
  std::string trace;
  std::string format = "json";
};

Json exponents_json(const PrimeExponentVector& v) {
  Json o = Json::object();
  for (const auto& pp : v.entries()) o[std::to_string(pp.prime)] = pp.exponent;
  return o;
}

int cmd_walk(const WalkArgs& a) {
  require_format(a.format, {"json", "text"});
  const JointStepLaw law = joint_law_from(a.config, a.law_json);
  if (a.n == 0) throw UsageError("--n must be >= 1");
  std::uint64_t seed = 1;
  apply_override(seed, "MPW_SEED", a.seed);
  RandomStream rng = RandomStream::derive(seed, 0);
  const std::uint64_t record[] = {a.n};
  const Trajectory tr = run_trajectory(law, a.n, rng, record, {}, a.trace.empty() ? 0 : a.n);
  const WalkState& s = tr.state;

  if (!a.trace.empty()) {
    std::ofstream out(a.trace);
    if (!out) throw UsageError("cannot write " + a.trace);
    write_trace_csv(out, s.trace());
  }
  if (a.format == "json") {
    Json j;
    j["law"] = law.describe();
    j["seed"] = seed;
    j["n"] = s.n();
    j["log_pi"] = s.log_pi();
    j["log_lcm_theta"] = s.log_lcm_theta();
    j["s"] = exponents_json(s.s_exponents());
    j["t_max"] = exponents_json(s.t_max_exponents());
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "law            " << law.describe() << '\n'
              << "n              " << s.n() << '\n'
              << "log_pi         " << format_double(s.log_pi()) << '\n'
              << "log_lcm_theta  " << format_double(s.log_lcm_theta()) << '\n'
              << std::setw(12) << "p" << std::setw(12) << "S_n(p)" << std::setw(12) << "max T(p)"
              << '\n';
    const auto sv = s.s_exponents();
    const auto tv = s.t_max_exponents();
    std::vector<std::uint64_t> primes;
    for (const auto& pp : sv.entries()) primes.push_back(pp.prime);
    for (const auto& pp : tv.entries()) primes.push_back(pp.prime);
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    for (const auto p : primes) {
      std::cout << std::setw(12) << p << std::setw(12) << s.s_value(p) << std::setw(12)
                << s.t_max_value(p) << '\n';
    }
  }
  return kExitPass;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::string manifest;
  std::string out_dir = ".";
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

int run_and_write(Json resolved, const fs::path& config_path, const ExperimentArgs& a) {
  require_format(a.format, {"text", "json", "csv"});
  std::uint64_t seed = resolved.contains("seed") && resolved["seed"].is_number_unsigned()
                           ? resolved["seed"].get<std::uint64_t>()
                           : 0;
  apply_override(seed, "MPW_SEED", a.seed);
  resolved["seed"] = seed;

  const fs::path base = config_path.parent_path();
  ExperimentConfig config = parse_experiment_config(resolved, base);
  unsigned threads = 1;
  apply_override(threads, "MPW_THREADS", a.threads);
  if (threads == 0) throw UsageError("--threads must be >= 1");
  config.threads = threads;

  const std::string started = utc_now();
  const ExperimentReport report = run_experiment(config);
  const std::string finished = utc_now();

  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  const std::string report_json = to_json(report).dump(2) + "\n";
  std::ostringstream text, plot, replicas;
  write_report_text(text, report);
  write_plot_csv(plot, report);
  write_replica_csv(replicas, report);
  write_file(dir / "report.json", report_json);
  write_file(dir / "report.txt", text.str());
  write_file(dir / "plot.csv", plot.str());
  write_file(dir / "replicas.csv", replicas.str());

  Json manifest;
  manifest["tool"] = "mpw";
  manifest["version"] = MPW_VERSION;
  manifest["config_path"] = fs::absolute(config_path).lexically_normal().string();
  manifest["config_sha256"] = sha256_hex(resolved.dump());
  manifest["resolved_config"] = resolved;
  manifest["seed"] = seed;
  manifest["threads"] = threads;
  manifest["started_utc"] = started;
  manifest["finished_utc"] = finished;
  manifest["runtime_seconds"] = report.runtime_seconds;
  manifest["status"] = report.status;
  manifest["outputs"] = {"report.json", "report.txt", "plot.csv", "replicas.csv"};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  if (a.format == "json") {
    std::cout << report_json;
  } else if (a.format == "csv") {
    std::cout << plot.str();
  } else {
    std::cout << text.str();
  }
  return report.status == "fail" ? kExitFail : kExitPass;
}

int cmd_experiment(const ExperimentArgs& a) {
  if (a.config.empty()) throw UsageError("--config is required");
  return run_and_write(read_json_file(a.config), a.config, a);
}

int cmd_replay(const ExperimentArgs& a) {
  const Json m = read_json_file(a.manifest);
  if (!m.is_object() || !m.contains("resolved_config") || !m.contains("config_path")) {
    throw ConfigError("", "not a run manifest: " + a.manifest);
  }
  ExperimentArgs b = a;
  if (!b.seed) b.seed = m["seed"].get<std::uint64_t>();
  return run_and_write(m["resolved_config"], m["config_path"].get<std::string>(), b);
}

// ---------------------------------------------------------------------------

struct ConditionArgs {
  std::string config;
  std::string law_json;
  std::vector<std::uint64_t> n_grid{100, 1000, 10000, 100000, 1000000};
  std::uint64_t prime_limit = 100000;
  std::string format = "text";
};

int cmd_check_conditions(const ConditionArgs& a) {
  require_format(a.format, {"text", "json", "csv"});
  const JointStepLaw law = joint_law_from(a.config, a.law_json);
  if (a.prime_limit < 2) throw UsageError("--prime-limit must be >= 2");
  for (const auto n : a.n_grid) {
    if (n == 0) throw UsageError("--n-grid entries must be >= 1");
  }
  const Main2ConditionReport r = check_main2_conditions(law, a.n_grid, a.prime_limit);
  const StepLaw xi = law.xi_marginal();
  if (a.format == "json") {
    Json j = to_json(r);
    j["law"] = law.describe();
    std::cout << j.dump(2) << '\n';
  } else if (a.format == "csv") {
    std::cout << "n,frequent_max_prime,frequent_count,remainder_eta,ratio_eta,remainder_diff,"
                 "ratio_diff\n";
    for (const auto& row : r.rows) {
      std::cout << row.n << ',' << row.frequent_max_prime << ',' << row.frequent_count << ','
                << format_double(row.remainder_eta) << ',' << format_double(row.ratio_eta) << ','
                << format_double(row.remainder_diff) << ',' << format_double(row.ratio_diff)
                << '\n';
    }
  } else {
    std::cout << "law                      " << law.describe() << '\n';
    write_conditions_text(std::cout, r, xi);
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplicative perturbed random walks: sampling, walks and limit experiments"};
  app.set_version_flag("--version", std::string(MPW_VERSION));
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw integers from a step law");
  sample->add_option("--law", sa.law,
                     "zeta, geometric, trunc_poisson, prime_power_heavy, pareto_exponent, "
                     "degenerate, table");
  sample->add_option("--alpha", sa.alpha, "zeta, pareto_exponent");
  sample->add_option("--beta", sa.beta, "geometric");
  sample->add_option("--lambda", sa.lambda, "trunc_poisson");
  sample->add_option("--value", sa.value, "degenerate");
  sample->add_option("--prime", sa.prime, "pareto_exponent");
  sample->add_option("--weights", sa.weights, "k:w pairs, e.g. 2:0.5,3:0.5");
  sample->add_option("--tail-exponent", sa.tail_exponent, "prime_power_heavy, default 2");
  sample->add_option("--law-json", sa.law_json, "Step law as a JSON document");
  sample->add_option("--count", sa.count, "Number of draws")->check(CLI::PositiveNumber);
  sample->add_option("--seed", sa.seed, "Default 1");
  sample->add_option("--format", sa.format, "text, csv or json");

  WalkArgs wa;
  auto* walk = app.add_subcommand("walk", "Run one walk and print its final state");
  walk->add_option("--config", wa.config, "Joint law or experiment config file");
  walk->add_option("--law-json", wa.law_json, "Joint law as a JSON document");
  walk->add_option("--n", wa.n, "Number of steps")->required();
  walk->add_option("--seed", wa.seed, "Overrides MPW_SEED and the config");
  walk->add_option("--trace", wa.trace, "Write k,log_pi,log_lcm_theta rows to this CSV file");
  walk->add_option("--format", wa.format, "json or text");

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "Run a limit experiment from a config");
  experiment->add_option("--config", ea.config, "Experiment config file")->required();
  experiment->add_option("--out-dir", ea.out_dir, "Directory for report and CSV files");
  experiment->add_option("--threads", ea.threads, "Worker threads; overrides MPW_THREADS");
  experiment->add_option("--seed", ea.seed, "Overrides MPW_SEED and the config");
  experiment->add_option("--format", ea.format, "Stdout format: text, json or csv");

  ExperimentArgs ra;
  auto* replay = app.add_subcommand("replay", "Re-run the experiment recorded in a manifest");
  replay->add_option("--manifest", ra.manifest, "manifest.json of an earlier run")->required();
  replay->add_option("--out-dir", ra.out_dir, "Directory for report and CSV files");
  replay->add_option("--threads", ra.threads, "Worker threads; overrides MPW_THREADS");
  replay->add_option("--format", ra.format, "Stdout format: text, json or csv");

  ConditionArgs ca;
  auto* cond = app.add_subcommand("check-conditions", "Evaluate the log-LCM negligibility sums");
  cond->add_option("--config", ca.config, "Joint law or experiment config file");
  cond->add_option("--law-json", ca.law_json, "Joint law as a JSON document");
  cond->add_option("--n-grid", ca.n_grid, "Comma-separated n values")->delimiter(',');
  cond->add_option("--prime-limit", ca.prime_limit, "Largest prime in the sums, default 100000");
  cond->add_option("--format", ca.format, "text, json or csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*sample) return cmd_sample(sa);
    if (*walk) return cmd_walk(wa);
    if (*experiment) return cmd_experiment(ea);
    if (*replay) return cmd_replay(ra);
    if (*cond) return cmd_check_conditions(ca);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
