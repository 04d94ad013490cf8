// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_CLI_HPP
#define GLFEM_CLI_HPP

#include <complex>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>
#include "glfem/assembly.hpp"
#include "glfem/minimize.hpp"

namespace glfem::cli
{

enum class Command
{
  Minimize,
  Eigs,
  Converge,
  Bestapprox,
  Lod
};

std::string to_string(Command command);

// A constant value like 0.8+0.6i, or a field file.
struct InitialValue
{
  std::string text;
  std::optional<std::complex<double>> constant;
  std::string path;
};

struct RunConfig
{
  Command command = Command::Minimize;
  std::optional<double> kappa;
  int n = 0;
  std::vector<int> levels;
  int n_ref = 0;
  std::vector<int> n_H;
  int n_h = 0;
  PotentialKind potential = PotentialKind::Paper;
  std::vector<InitialValue> initial;
  std::optional<double> tau;  // empty: auto
  double delta_gf = 1e-9;
  double delta_newton = 1e-12;
  int quad_degree = 5;
  std::string output_dir = ".";
  std::string field;  // input field: state for eigs, reference for converge/bestapprox/lod
  int eigs = 5;
  int max_gf_iters = 50000;
  int max_newton_iters = 50;
  double linear_tol = 1e-12;
  int log_every = 0;

  Problem problem() const;
  SolverConfig solver() const;
};

using KeyValues = std::map<std::string, std::string>;

// Every accepted key.
const std::vector<std::string> &known_keys();

// key=value lines; blank lines and lines starting with '#' are skipped.
KeyValues read_config_file(const std::string &path);
KeyValues parse_key_values(const std::string &text, const std::string &origin = "config");

// Resolves defaults and validates; errors name the offending key.
RunConfig parse_config(const KeyValues &values);

InitialValue parse_initial(const std::string &text);

// Throws std::invalid_argument unless the levels form a strictly increasing chain in which
// every level is a power-of-two multiple of the previous one and divides n_ref by a power of two.
void validate_level_chain(const std::vector<int> &levels, int n_ref, const std::string &key);

// Runs the command and writes field files, results.csv and summary.json into output_dir.
// Returns 0 when every minimization converged and 2 otherwise; errors propagate as exceptions.
int run(const RunConfig &config, std::ostream &log);

}  // namespace glfem::cli

#endif  // GLFEM_CLI_HPP
