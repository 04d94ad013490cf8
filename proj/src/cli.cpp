// SPDX-License-Identifier: Apache-2.0

#include "glfem/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <json.hpp>
#include "glfem/errors.hpp"
#include "glfem/field.hpp"
#include "glfem/io.hpp"
#include "glfem/lod.hpp"
#include "glfem/spectrum.hpp"
#include "glfem/study.hpp"

namespace glfem::cli
{

namespace
{

using nlohmann::json;

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
  {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep)
{
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
  {
    parts.push_back(trim(item));
  }
  return parts;
}

[[noreturn]] void key_error(const std::string &key, const std::string &what)
{
  throw std::invalid_argument("key '" + key + "': " + what);
}

double real_value(const std::string &key, const std::string &text)
{
  try
  {
    return parse_double(trim(text), key);
  }
  catch (const FormatError &)
  {
    key_error(key, "expected a real number, got '" + text + "'");
  }
}

int int_value(const std::string &key, const std::string &text)
{
  const std::string t = trim(text);
  std::size_t used = 0;
  long v = 0;
  try
  {
    v = std::stol(t, &used);
  }
  catch (const std::exception &)
  {
    used = 0;
  }
  if (t.empty() || used != t.size() || v < -(1L << 30) || v > (1L << 30))
  {
    key_error(key, "expected an integer, got '" + text + "'");
  }
  return static_cast<int>(v);
}

std::vector<int> int_list(const std::string &key, const std::string &text)
{
  std::vector<int> out;
  for (const std::string &part : split(text, ','))
  {
    out.push_back(int_value(key, part));
  }
  if (out.empty())
  {
    key_error(key, "expected a comma-separated list of integers");
  }
  return out;
}

bool is_power_of_two(int v)
{
  return v > 0 && (v & (v - 1)) == 0;
}

bool power_of_two_multiple(int fine, int coarse)
{
  return coarse > 0 && fine % coarse == 0 && is_power_of_two(fine / coarse);
}

std::string join(const std::vector<int> &v)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    out += (i ? "," : "") + std::to_string(v[i]);
  }
  return out;
}

json config_json(const RunConfig &c)
{
  json j;
  j["command"] = to_string(c.command);
  j["kappa"] = c.kappa ? json(*c.kappa) : json(nullptr);
  j["n"] = c.n;
  j["levels"] = c.levels;
  j["n_ref"] = c.n_ref;
  j["n_H"] = c.n_H;
  j["n_h"] = c.n_h;
  j["potential"] = c.potential == PotentialKind::Paper ? "paper" : "zero";
  json init = json::array();
  for (const InitialValue &v : c.initial)
  {
    init.push_back(v.text);
  }
  j["initial"] = init;
  j["tau_mode"] = c.tau ? "fixed" : "auto";
  j["tau"] = c.kappa ? json(c.solver().resolved_tau(*c.kappa)) : json(nullptr);
  j["delta_gf"] = c.delta_gf;
  j["delta_newton"] = c.delta_newton;
  j["quad_degree"] = c.quad_degree;
  j["output_dir"] = c.output_dir;
  j["field"] = c.field;
  j["eigs"] = c.eigs;
  j["max_gf_iters"] = c.max_gf_iters;
  j["max_newton_iters"] = c.max_newton_iters;
  j["linear_tol"] = c.linear_tol;
  j["log_every"] = c.log_every;
  return j;
}

json field_json(const ComplexField &u, const Problem &problem)
{
  const NormReport nr = norms(u, problem.kappa);
  const double E = energy(u, problem), k2 = problem.kappa * problem.kappa;
  return {{"n", u.mesh().subdivisions()},
          {"energy", E},
          {"energy_over_kappa2", k2 > 0.0 ? json(E / k2) : json(nullptr)},
          {"l2", nr.l2},
          {"h1_semi", nr.h1_semi},
          {"hk1", nr.hk1},
          {"max_modulus", u.modulus().maxCoeff()}};
}

json report_json(const MinimizeReport &r)
{
  return {{"converged", r.converged},
          {"message", r.message},
          {"final_energy", r.final_energy},
          {"final_residual_norm", r.final_residual_norm},
          {"gf_iters", r.gf_iters},
          {"newton_iters", r.newton_iters},
          {"newton_residuals", r.newton_residuals}};
}

json bounds_json(const ComplexField &u, const Problem &problem)
{
  try
  {
    const BoundsReport b = bounds_report(u, problem);
    return {{"ok", true}, {"energy", b.energy}, {"l2", b.l2}, {"hk1_over_kappa", b.hk1_over_k}};
  }
  catch (const BoundViolation &e)
  {
    return {{"ok", false}, {"message", e.what()}};
  }
}

json uniqueness_json(const UniquenessReport &u)
{
  std::vector<double> values(u.eigs.values.data(), u.eigs.values.data() + u.eigs.values.size());
  return {{"eigenvalues", values},
          {"gauge_angle", u.eigs.gauge_angle},
          {"verdict", to_string(u.verdict)},
          {"reason", u.reason},
          {"eps_zero", u.eps_zero},
          {"gap_min", u.gap_min},
          {"angle_tol", u.angle_tol}};
}

std::string path_in(const RunConfig &c, const std::string &name)
{
  return (std::filesystem::path(c.output_dir) / name).string();
}

// Moves a stored field onto the target mesh when the two meshes are nested.
ComplexField transfer(const ComplexField &u, const MeshPtr &mesh, const std::string &origin)
{
  const int from = u.mesh().subdivisions(), to = mesh->subdivisions();
  if (from == to)
  {
    return ComplexField(mesh, u.re(), u.im());
  }
  if (power_of_two_multiple(to, from))
  {
    return prolong(u, mesh);
  }
  if (power_of_two_multiple(from, to))
  {
    return restrict_interpolate(u, mesh);
  }
  throw NotNestedError(origin + ": field on n=" + std::to_string(from) +
                       " cannot be transferred to n=" + std::to_string(to));
}

struct BestRun
{
  MinimizeReport report;
  json candidates = json::array();
};

// Minimizes from every initial value and keeps the lowest energy (first one on ties).
BestRun best_minimizer(const RunConfig &c, const GlSystem &system, std::ostream &log)
{
  BestRun best;
  bool have = false;
  for (const InitialValue &init : c.initial)
  {
    const ComplexField u0 =
        init.constant ? ComplexField::constant(system.mesh_ptr(), *init.constant)
                      : transfer(read_field(init.path).field, system.mesh_ptr(), init.path);
    MinimizeReport r = minimize(u0, system, c.solver());
    log << "[minimize] n=" << system.mesh().subdivisions() << " initial=" << init.text
        << " E=" << format_double(r.final_energy) << " gf=" << r.gf_iters
        << " newton=" << r.newton_iters << (r.converged ? "" : " (not converged)") << '\n';
    best.candidates.push_back({{"initial", init.text},
                               {"energy", r.final_energy},
                               {"converged", r.converged}});
    if (!have || r.final_energy < best.report.final_energy)
    {
      best.report = std::move(r);
      have = true;
    }
  }
  return best;
}

struct Reference
{
  ReferenceSolution solution;
  json summary;
};

Reference build_reference(RunConfig &c, const Problem &problem, int n_ref, std::ostream &log)
{
  Reference out;
  if (!c.field.empty())
  {
    const FieldFile ff = read_field(c.field);
    out.solution = adopt_reference(ff.field, problem, true);
    out.summary["source"] = c.field;
  }
  else
  {
    auto system = std::make_shared<const GlSystem>(problem, make_mesh(n_ref));
    BestRun best = best_minimizer(c, *system, log);
    out.summary["candidates"] = best.candidates;
    out.summary["minimization"] = report_json(best.report);
    out.solution = make_reference(std::move(system), std::move(best.report), true);
  }
  const ReferenceSolution &ref = out.solution;
  out.summary["field"] = field_json(ref.field, problem);
  out.summary["uniqueness"] = uniqueness_json(ref.uniqueness);
  out.summary["warning"] = ref.warning;
  if (!ref.warning.empty())
  {
    log << "[reference] warning: " << ref.warning << '\n';
  }
  write_field(path_in(c, "reference.field"), ref.field, problem.kappa);
  return out;
}

int resolved_reference_size(RunConfig &c, int configured)
{
  if (c.field.empty())
  {
    return configured;
  }
  const FieldFile ff = read_field(c.field);
  const int n = ff.field.mesh().subdivisions();
  if (configured != 0 && configured != n)
  {
    key_error("field", "reference file is on n=" + std::to_string(n) + " but " +
                           std::to_string(configured) + " was requested");
  }
  if (!c.kappa)
  {
    c.kappa = ff.kappa;
  }
  return n;
}

json records_json(const std::vector<ConvergenceRecord> &records)
{
  json out = json::array();
  for (const ConvergenceRecord &r : records)
  {
    out.push_back({{"n", r.n},
                   {"energy", r.energy},
                   {"energy_bestapprox", r.energy_bestapprox},
                   {"err_hk1", r.err_hk1},
                   {"err_l2", r.err_l2},
                   {"err_energy", r.err_energy},
                   {"bestapprox_hk1", r.bestapprox_hk1},
                   {"hk1_over_kappa", r.kappa > 0.0 ? json(r.hk1_norm / r.kappa) : json(nullptr)},
                   {"phase", r.phase},
                   {"converged", r.converged},
                   {"symmetry_flag", r.symmetry_flag}});
  }
  return out;
}

int run_minimize(RunConfig &c, json &summary, std::ostream &log)
{
  const Problem problem = c.problem();
  const GlSystem system(problem, make_mesh(c.n));
  BestRun best = best_minimizer(c, system, log);
  const MinimizeReport &r = best.report;
  write_field(path_in(c, "minimizer.field"), r.field, problem.kappa);

  const NormReport nr = norms(r.field, problem.kappa);
  const double k2 = problem.kappa * problem.kappa;
  std::string csv = "kappa,n,h,energy,scaled_energy,l2,hk1,max_modulus,residual_norm,gf_iters,"
                    "newton_iters,converged\n";
  csv += format_double(problem.kappa) + ',' + std::to_string(c.n) + ',' + format_double(1.0 / c.n) +
         ',' + format_double(r.final_energy) + ',' +
         format_double(k2 > 0.0 ? r.final_energy / k2 : r.final_energy) + ',' + format_double(nr.l2) +
         ',' + format_double(nr.hk1) + ',' + format_double(r.field.modulus().maxCoeff()) + ',' +
         format_double(r.final_residual_norm) + ',' + std::to_string(r.gf_iters) + ',' +
         std::to_string(r.newton_iters) + ',' + (r.converged ? "1" : "0") + '\n';
  write_file_atomic(path_in(c, "results.csv"), csv);

  summary["candidates"] = best.candidates;
  summary["minimization"] = report_json(r);
  summary["field"] = field_json(r.field, problem);
  summary["bounds"] = bounds_json(r.field, problem);
  return r.converged ? 0 : 2;
}

int run_eigs(RunConfig &c, json &summary, std::ostream &log)
{
  int code = 0;
  ComplexField u;
  if (!c.field.empty())
  {
    const FieldFile ff = read_field(c.field);
    if (!c.kappa)
    {
      c.kappa = ff.kappa;
    }
    u = ff.field;
    c.n = u.mesh().subdivisions();
    summary["source"] = c.field;
  }
  const Problem problem = c.problem();
  const GlSystem system(problem, u.mesh_ptr() ? u.mesh_ptr() : make_mesh(c.n));
  if (c.field.empty())
  {
    BestRun best = best_minimizer(c, system, log);
    code = best.report.converged ? 0 : 2;
    u = best.report.field;
    summary["candidates"] = best.candidates;
    summary["minimization"] = report_json(best.report);
    write_field(path_in(c, "minimizer.field"), u, problem.kappa);
  }
  if (!(problem.kappa > 0.0))
  {
    key_error("kappa", "the eigenvalue test needs kappa > 0");
  }
  const UniquenessReport uq = verify_local_uniqueness(u, system, c.eigs);
  log << "[eigs] verdict=" << to_string(uq.verdict) << '\n';

  std::string csv = "kappa,n";
  for (int i = 1; i <= c.eigs; ++i)
  {
    csv += ",lambda_" + std::to_string(i);
  }
  csv += ",gauge_angle,verdict\n";
  csv += format_double(problem.kappa) + ',' + std::to_string(c.n);
  for (Eigen::Index i = 0; i < uq.eigs.values.size(); ++i)
  {
    csv += ',' + format_double(uq.eigs.values(i));
  }
  csv += ',' + format_double(uq.eigs.gauge_angle) + ',' + to_string(uq.verdict) + '\n';
  write_file_atomic(path_in(c, "results.csv"), csv);

  summary["field"] = field_json(u, problem);
  summary["uniqueness"] = uniqueness_json(uq);
  return code;
}

int run_converge(RunConfig &c, json &summary, std::ostream &log)
{
  c.n_ref = resolved_reference_size(c, c.n_ref);
  validate_level_chain(c.levels, c.n_ref, "levels");
  const Problem problem = c.problem();
  Reference ref = build_reference(c, problem, c.n_ref, log);
  summary["reference"] = ref.summary;

  const std::vector<ConvergenceRecord> records =
      convergence_study(ref.solution, c.levels, c.solver());
  bool converged = ref.solution.report.converged;
  for (const ConvergenceRecord &r : records)
  {
    converged = converged && r.converged;
    write_field(path_in(c, "level_" + std::to_string(r.n) + ".field"), r.field, problem.kappa);
    log << "[converge] n=" << r.n << " err_hk1=" << format_double(r.err_hk1)
        << (r.converged ? "" : " (not converged)") << '\n';
  }
  write_file_atomic(path_in(c, "results.csv"), records_csv(records));
  const RateSummary rates = headline_orders(records);
  summary["levels"] = records_json(records);
  summary["orders"] = {{"hk1", rates.hk1}, {"l2", rates.l2}, {"energy", rates.energy},
                       {"samples", rates.samples}};
  return converged ? 0 : 2;
}

int run_bestapprox(RunConfig &c, json &summary, std::ostream &log)
{
  c.n_ref = resolved_reference_size(c, c.n_ref);
  validate_level_chain(c.levels, c.n_ref, "levels");
  const Problem problem = c.problem();
  Reference ref = build_reference(c, problem, c.n_ref, log);
  summary["reference"] = ref.summary;
  const ReferenceSolution &sol = ref.solution;

  std::string csv = "kappa,n,h,bestapprox_hk1,bestapprox_l2,order_hk1,order_l2,energy\n";
  json levels = json::array();
  double prev_hk1 = kNaN, prev_l2 = kNaN, prev_h = kNaN;
  for (const int n : c.levels)
  {
    const MeshPtr mesh = make_mesh(n);
    const ComplexField best = best_approx(sol.field, mesh, *sol.system);
    write_field(path_in(c, "bestapprox_" + std::to_string(n) + ".field"), best, problem.kappa);
    const NormReport err = norms(sol.field - prolong(best, sol.system->mesh_ptr()), problem.kappa);
    const double h = 1.0 / n, E = energy(best, problem);
    const double lh = std::log(prev_h / h);
    const double o_hk1 = std::isnan(prev_h) ? kNaN : std::log(prev_hk1 / err.hk1) / lh;
    const double o_l2 = std::isnan(prev_h) ? kNaN : std::log(prev_l2 / err.l2) / lh;
    csv += format_double(problem.kappa) + ',' + std::to_string(n) + ',' + format_double(h) + ',' +
           format_double(err.hk1) + ',' + format_double(err.l2) + ',' + format_double(o_hk1) + ',' +
           format_double(o_l2) + ',' + format_double(E) + '\n';
    levels.push_back({{"n", n}, {"bestapprox_hk1", err.hk1}, {"bestapprox_l2", err.l2},
                      {"energy", E}});
    prev_hk1 = err.hk1;
    prev_l2 = err.l2;
    prev_h = h;
  }
  write_file_atomic(path_in(c, "results.csv"), csv);
  summary["levels"] = levels;
  return sol.report.converged ? 0 : 2;
}

int run_lod(RunConfig &c, json &summary, std::ostream &log)
{
  c.n_h = resolved_reference_size(c, c.n_h);
  validate_level_chain(c.n_H, c.n_h, "n_H");
  const Problem problem = c.problem();
  if (!(problem.kappa > 0.0))
  {
    key_error("kappa", "lod needs kappa > 0");
  }
  Reference ref = build_reference(c, problem, c.n_h, log);
  summary["reference"] = ref.summary;

  const std::vector<ConvergenceRecord> records = lod_study(ref.solution, c.n_H, c.solver());
  bool converged = ref.solution.report.converged;
  std::vector<double> h, proj, err;
  for (const ConvergenceRecord &r : records)
  {
    converged = converged && r.converged;
    write_field(path_in(c, "lod_" + std::to_string(r.n) + ".field"), r.field, problem.kappa);
    log << "[lod] n_H=" << r.n << " err_hk1=" << format_double(r.err_hk1)
        << " projection_hk1=" << format_double(r.bestapprox_hk1) << '\n';
    h.push_back(r.h);
    proj.push_back(r.bestapprox_hk1);
    err.push_back(r.err_hk1);
  }
  write_file_atomic(path_in(c, "results.csv"), records_csv(records, "lod"));
  summary["levels"] = records_json(records);
  if (records.size() >= 2)
  {
    summary["fitted_order_hk1"] = {{"projection", fitted_order(h, proj)},
                                   {"minimizer", fitted_order(h, err)}};
  }
  return converged ? 0 : 2;
}

}  // namespace

std::string to_string(Command command)
{
  switch (command)
  {
    case Command::Minimize:
      return "minimize";
    case Command::Eigs:
      return "eigs";
    case Command::Converge:
      return "converge";
    case Command::Bestapprox:
      return "bestapprox";
    case Command::Lod:
      return "lod";
  }
  return "?";
}

Problem RunConfig::problem() const
{
  return Problem(kappa.value_or(0.0),
                 potential == PotentialKind::Paper ? Potential::paper() : Potential::zero(),
                 quad_degree);
}

SolverConfig RunConfig::solver() const
{
  SolverConfig s;
  s.tau = tau;
  s.delta_gf = delta_gf;
  s.delta_newton = delta_newton;
  s.max_gf_iters = max_gf_iters;
  s.max_newton_iters = max_newton_iters;
  s.linear_tol = linear_tol;
  s.log_every = log_every;
  return s;
}

const std::vector<std::string> &known_keys()
{
  static const std::vector<std::string> keys = {
      "command", "kappa",        "n",     "levels",       "n_ref",
      "n_H",     "n_h",          "potential", "initial",  "tau",
      "delta_gf", "delta_newton", "quad_degree", "output_dir", "field",
      "eigs",    "max_gf_iters", "max_newton_iters", "linear_tol", "log_every"};
  return keys;
}

KeyValues parse_key_values(const std::string &text, const std::string &origin)
{
  KeyValues out;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#')
    {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
    {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + t + "'");
    }
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

KeyValues read_config_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw std::runtime_error("cannot open config file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path);
}

InitialValue parse_initial(const std::string &raw)
{
  InitialValue v;
  v.text = trim(raw);
  const std::string &t = v.text;
  if (t.empty())
  {
    key_error("initial", "empty value");
  }
  try
  {
    if (t.back() == 'i' || t.back() == 'j')
    {
      const std::string body = t.substr(0, t.size() - 1);
      // The imaginary part starts at the last sign that is not an exponent sign.
      std::size_t split_at = std::string::npos;
      for (std::size_t k = body.size(); k-- > 0;)
      {
        if ((body[k] == '+' || body[k] == '-') &&
            (k == 0 || (body[k - 1] != 'e' && body[k - 1] != 'E')))
        {
          split_at = k;
          break;
        }
      }
      const std::string re = split_at == std::string::npos ? "" : trim(body.substr(0, split_at));
      std::string im = split_at == std::string::npos ? body : body.substr(split_at);
      if (im == "+" || im == "-" || im.empty())
      {
        im += "1";
      }
      if (im[0] == '+')
      {
        im.erase(0, 1);
      }
      v.constant = std::complex<double>(re.empty() ? 0.0 : parse_double(re, "initial"), parse_double(trim(im), "initial"));
      return v;
    }
    v.constant = std::complex<double>(parse_double(t, "initial"), 0.0);
    return v;
  }
  catch (const FormatError &)
  {
  }
  if (!std::filesystem::is_regular_file(t))
  {
    key_error("initial", "'" + t + "' is neither a complex constant nor an existing file");
  }
  v.path = t;
  return v;
}

void validate_level_chain(const std::vector<int> &levels, int n_ref, const std::string &key)
{
  if (levels.empty())
  {
    key_error(key, "needs at least one level");
  }
  for (std::size_t i = 0; i < levels.size(); ++i)
  {
    const int n = levels[i];
    if (n < 1)
    {
      key_error(key, "levels must be positive, got " + std::to_string(n));
    }
    if (i > 0 && !(n > levels[i - 1] && power_of_two_multiple(n, levels[i - 1])))
    {
      key_error(key, join(levels) + " is not a strictly increasing power-of-two chain (" +
                         std::to_string(n) + " after " + std::to_string(levels[i - 1]) + ")");
    }
    if (!power_of_two_multiple(n_ref, n))
    {
      key_error(key, "level " + std::to_string(n) + " does not divide " + std::to_string(n_ref) +
                         " by a power of two");
    }
  }
}

RunConfig parse_config(const KeyValues &values)
{
  const auto &keys = known_keys();
  for (const auto &kv : values)
  {
    if (std::find(keys.begin(), keys.end(), kv.first) == keys.end())
    {
      throw std::invalid_argument("unknown key '" + kv.first + "'");
    }
  }
  auto get = [&](const std::string &key) -> const std::string *
  {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };

  RunConfig c;
  const std::string *cmd = get("command");
  if (!cmd)
  {
    key_error("command", "missing (one of minimize, eigs, converge, bestapprox, lod)");
  }
  const std::string name = trim(*cmd);
  if (name == "minimize")
  {
    c.command = Command::Minimize;
  }
  else if (name == "eigs")
  {
    c.command = Command::Eigs;
  }
  else if (name == "converge")
  {
    c.command = Command::Converge;
  }
  else if (name == "bestapprox")
  {
    c.command = Command::Bestapprox;
  }
  else if (name == "lod")
  {
    c.command = Command::Lod;
  }
  else
  {
    key_error("command", "unknown command '" + name + "'");
  }

  if (const auto *v = get("kappa"))
  {
    c.kappa = real_value("kappa", *v);
    if (!std::isfinite(*c.kappa) || *c.kappa < 0.0)
    {
      key_error("kappa", "must be a finite nonnegative number");
    }
  }
  auto mesh_size = [&](const std::string &key, int &target)
  {
    if (const auto *v = get(key))
    {
      target = int_value(key, *v);
      if (target < 1)
      {
        key_error(key, "must be at least 1");
      }
    }
  };
  mesh_size("n", c.n);
  mesh_size("n_ref", c.n_ref);
  mesh_size("n_h", c.n_h);
  if (const auto *v = get("levels"))
  {
    c.levels = int_list("levels", *v);
  }
  if (const auto *v = get("n_H"))
  {
    c.n_H = int_list("n_H", *v);
  }
  if (const auto *v = get("potential"))
  {
    const std::string p = trim(*v);
    if (p == "paper")
    {
      c.potential = PotentialKind::Paper;
    }
    else if (p == "zero")
    {
      c.potential = PotentialKind::Zero;
    }
    else
    {
      key_error("potential", "expected paper or zero, got '" + p + "'");
    }
  }
  for (const std::string &part : split(get("initial") ? *get("initial") : "0.8+0.6i", ';'))
  {
    c.initial.push_back(parse_initial(part));
  }
  if (const auto *v = get("tau"))
  {
    if (trim(*v) != "auto")
    {
      c.tau = real_value("tau", *v);
      if (!(*c.tau > 0.0) || !std::isfinite(*c.tau))
      {
        key_error("tau", "must be positive or auto");
      }
    }
  }
  auto positive_real = [&](const std::string &key, double &target)
  {
    if (const auto *v = get(key))
    {
      target = real_value(key, *v);
      if (!(target > 0.0) || !std::isfinite(target))
      {
        key_error(key, "must be positive");
      }
    }
  };
  positive_real("delta_gf", c.delta_gf);
  positive_real("delta_newton", c.delta_newton);
  positive_real("linear_tol", c.linear_tol);
  auto nonnegative_int = [&](const std::string &key, int &target)
  {
    if (const auto *v = get(key))
    {
      target = int_value(key, *v);
      if (target < 0)
      {
        key_error(key, "must be nonnegative");
      }
    }
  };
  nonnegative_int("max_gf_iters", c.max_gf_iters);
  nonnegative_int("max_newton_iters", c.max_newton_iters);
  nonnegative_int("log_every", c.log_every);
  if (const auto *v = get("quad_degree"))
  {
    c.quad_degree = int_value("quad_degree", *v);
    if (c.quad_degree != 1 && c.quad_degree != 2 && c.quad_degree != 5)
    {
      key_error("quad_degree", "supported degrees are 1, 2 and 5");
    }
  }
  if (const auto *v = get("eigs"))
  {
    c.eigs = int_value("eigs", *v);
    if (c.eigs < 2)
    {
      key_error("eigs", "need at least 2 eigenvalues");
    }
  }
  if (const auto *v = get("output_dir"))
  {
    c.output_dir = trim(*v);
    if (c.output_dir.empty())
    {
      key_error("output_dir", "empty path");
    }
  }
  if (const auto *v = get("field"))
  {
    c.field = trim(*v);
    if (!std::filesystem::is_regular_file(c.field))
    {
      key_error("field", "file '" + c.field + "' does not exist");
    }
  }

  auto require = [&](const std::string &key, bool present)
  {
    if (!present)
    {
      key_error(key, "required by command " + name);
    }
  };
  const bool has_field = !c.field.empty();
  switch (c.command)
  {
    case Command::Minimize:
      require("kappa", c.kappa.has_value());
      require("n", c.n > 0);
      break;
    case Command::Eigs:
      if (!has_field)
      {
        require("kappa", c.kappa.has_value());
        require("n", c.n > 0);
      }
      break;
    case Command::Converge:
    case Command::Bestapprox:
      require("levels", !c.levels.empty());
      if (!has_field)
      {
        require("kappa", c.kappa.has_value());
        require("n_ref", c.n_ref > 0);
        validate_level_chain(c.levels, c.n_ref, "levels");
      }
      break;
    case Command::Lod:
      require("n_H", !c.n_H.empty());
      if (!has_field)
      {
        require("kappa", c.kappa.has_value());
        require("n_h", c.n_h > 0);
        validate_level_chain(c.n_H, c.n_h, "n_H");
      }
      if (c.kappa && !(*c.kappa > 0.0))
      {
        key_error("kappa", "lod needs kappa > 0");
      }
      break;
  }
  return c;
}

int run(const RunConfig &config, std::ostream &log)
{
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig c = config;
  std::filesystem::create_directories(c.output_dir);
  json summary;
  int code = 0;
  switch (c.command)
  {
    case Command::Minimize:
      code = run_minimize(c, summary, log);
      break;
    case Command::Eigs:
      code = run_eigs(c, summary, log);
      break;
    case Command::Converge:
      code = run_converge(c, summary, log);
      break;
    case Command::Bestapprox:
      code = run_bestapprox(c, summary, log);
      break;
    case Command::Lod:
      code = run_lod(c, summary, log);
      break;
  }
  summary["config"] = config_json(c);
  summary["converged"] = code == 0;
  summary["exit_code"] = code;
  summary["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file_atomic(path_in(c, "summary.json"), summary.dump(2) + '\n');
  return code;
}

}  // namespace glfem::cli
