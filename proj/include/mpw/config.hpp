#pragma once

// JSON configuration documents for laws and experiments.
//
// Step law:   {"kind": "zeta", "alpha": 2}
//             kinds: zeta{alpha}, geometric{beta}, trunc_poisson{lambda},
//             prime_power_heavy{weights{"p": w}, tail_exponent?},
//             pareto_exponent{prime, alpha}, degenerate{value},
//             table{pmf{"k": w}}, product{factors[...]}
// Joint law:  {"coupling": "independent", "xi": law, "eta": law}
//             {"coupling": "identical", "law": law}
//             {"coupling": "xi_one", "eta": law}
//             {"coupling": "joint_table", "csv": path} or {..., "atoms": [[xi, eta, w], ...]}
// Experiment: theorem, law, t, u_grid, replicas, seed are required;
//             primes, tolerances{ks_alpha, sigma_band}, extreme{r_min, oracle_factor},
//             prime_limit are optional.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "mpw/distributions.hpp"
#include "mpw/limit_lab.hpp"
#include "mpw/report.hpp"

namespace mpw {

/// Schema or value error; `where()` is a JSON-pointer-like location such as "law.eta.alpha".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& message)
      : std::runtime_error((where.empty() ? std::string("config") : where) + ": " + message),
        where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

StepLaw parse_step_law(const Json& doc, const std::string& where = "law");

/// Relative CSV paths resolve against `base_dir`.
JointStepLaw parse_joint_law(const Json& doc, const std::filesystem::path& base_dir = {},
                             const std::string& where = "law");

ExperimentConfig parse_experiment_config(const Json& doc,
                                         const std::filesystem::path& base_dir = {});

/// Throws ConfigError on unreadable files or malformed JSON.
Json read_json_file(const std::filesystem::path& file);

}  // namespace mpw
