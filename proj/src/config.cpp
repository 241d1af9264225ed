#include "irkmg/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "irkmg/error.hpp"

namespace irkmg
{

namespace
{

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
  {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string &key, const std::string &value)
{
  double v = 0.0;
  const char *first = value.data();
  const char *last = value.data() + value.size();
  if (first != last && *first == '+')
  {
    first++;
  }
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
  {
    throw InvalidParameter(key + ": expected a number, got '" + value + "'");
  }
  return v;
}

int to_int(const std::string &key, const std::string &value)
{
  int v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
  {
    throw InvalidParameter(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

bool to_bool(const std::string &key, const std::string &value)
{
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on")
  {
    return true;
  }
  if (v == "0" || v == "false" || v == "no" || v == "off")
  {
    return false;
  }
  throw InvalidParameter(key + ": expected a boolean, got '" + value + "'");
}

}  // namespace

const std::vector<std::string> &config_keys()
{
  static const std::vector<std::string> keys = {
      "problem", "family", "stages", "n0", "level", "final-time", "timestep", "dt",
      "warm-start", "stage-bc",
      "smoother.sweeps", "smoother.cheby_a", "smoother.cheby_b", "smoother.accel",
      "smoother.omega", "mg.levels",
      "krylov.rtol", "krylov.atol", "krylov.maxiter", "krylov.restart",
      "newton.atol", "newton.maxit", "newton.ew_gamma", "newton.ew_alpha", "newton.eta0",
      "newton.eta_max"};
  return keys;
}

void apply_config_value(RunConfig &c, const std::string &key, const std::string &raw)
{
  const std::string value = trim(raw);
  if (key == "problem")
  {
    c.problem = parse_problem(value);
  }
  else if (key == "family")
  {
    c.family = parse_family(value);
  }
  else if (key == "stages")
  {
    c.stages = to_int(key, value);
  }
  else if (key == "n0")
  {
    c.n0 = to_int(key, value);
  }
  else if (key == "level")
  {
    c.level = to_int(key, value);
  }
  else if (key == "final-time")
  {
    c.final_time = to_double(key, value);
  }
  else if (key == "timestep")
  {
    if (value == "scaled")
    {
      c.rule = TimestepRule::Scaled;
    }
    else if (value == "fixed")
    {
      c.rule = TimestepRule::Fixed;
    }
    else
    {
      throw InvalidParameter("timestep must be 'scaled' or 'fixed', got '" + value + "'");
    }
  }
  else if (key == "dt")
  {
    c.fixed_dt = to_double(key, value);
    c.rule = TimestepRule::Fixed;
  }
  else if (key == "warm-start")
  {
    c.warm_start = to_bool(key, value);
  }
  else if (key == "stage-bc")
  {
    c.stage_bc = parse_stage_bc(value);
  }
  else if (key == "smoother.sweeps")
  {
    c.mg.smoother.sweeps = to_int(key, value);
  }
  else if (key == "smoother.cheby_a")
  {
    c.cheby_a = to_double(key, value);
  }
  else if (key == "smoother.cheby_b")
  {
    c.mg.smoother.cheby_b = to_double(key, value);
  }
  else if (key == "smoother.accel")
  {
    if (value == "chebyshev")
    {
      c.mg.smoother.accel = SmootherAccel::Chebyshev;
    }
    else if (value == "gmres")
    {
      c.mg.smoother.accel = SmootherAccel::GMRES;
    }
    else
    {
      throw InvalidParameter("smoother.accel must be 'chebyshev' or 'gmres', got '" + value +
                             "'");
    }
  }
  else if (key == "smoother.omega")
  {
    c.mg.smoother.omega = to_double(key, value);
  }
  else if (key == "mg.levels")
  {
    c.mg.levels = to_int(key, value);
  }
  else if (key == "krylov.rtol")
  {
    c.krylov.rtol = to_double(key, value);
  }
  else if (key == "krylov.atol")
  {
    c.krylov_atol = to_double(key, value);
  }
  else if (key == "krylov.maxiter")
  {
    c.krylov.maxiter = to_int(key, value);
  }
  else if (key == "krylov.restart")
  {
    c.krylov.restart = to_int(key, value);
  }
  else if (key == "newton.atol")
  {
    c.newton_atol = to_double(key, value);
  }
  else if (key == "newton.maxit")
  {
    c.newton.maxit = to_int(key, value);
  }
  else if (key == "newton.ew_gamma")
  {
    c.newton.ew_gamma = to_double(key, value);
  }
  else if (key == "newton.ew_alpha")
  {
    c.newton.ew_alpha = to_double(key, value);
  }
  else if (key == "newton.eta0")
  {
    c.newton.eta0 = to_double(key, value);
  }
  else if (key == "newton.eta_max")
  {
    c.newton.eta_max = to_double(key, value);
  }
  else
  {
    throw InvalidParameter("unknown configuration key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> parse_config(std::istream &is)
{
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line))
  {
    lineno++;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#')
    {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
    {
      throw InvalidParameter("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
    {
      throw InvalidParameter("config line " + std::to_string(lineno) + ": unknown key '" + key +
                             "'");
    }
    out.emplace_back(key, trim(t.substr(eq + 1)));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
  {
    throw InvalidParameter("cannot read config file '" + path + "'");
  }
  return parse_config(is);
}

}  // namespace irkmg
