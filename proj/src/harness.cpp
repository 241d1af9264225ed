#include "irkmg/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "irkmg/error.hpp"
#include "irkmg/hierarchy.hpp"
#include "irkmg/ns_stage.hpp"

namespace irkmg
{

namespace
{

using std::numbers::pi;

std::string lower_alnum(const std::string &s)
{
  std::string out;
  for (char c : s)
  {
    if (std::isalnum(static_cast<unsigned char>(c)))
    {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

double schedule_tolerance(int steps)
{
  return 1e-2 * std::pow(static_cast<double>(steps), -3.0);
}

struct Setup
{
  RunConfig config;
  ButcherTableau tableau;
  int steps = 0;
  double dt = 0.0;
  std::unique_ptr<TaylorHoodHierarchy> hierarchy;
  std::unique_ptr<MultigridPreconditioner> mg;
  DirichletSpec bc;
};

Setup make_setup(const RunConfig &config, double default_cheby_a)
{
  validate(config);
  Setup s;
  s.config = config;
  s.tableau = tableau_lookup(config.family, config.stages);
  std::tie(s.steps, s.dt) = timestep_schedule(config);
  s.hierarchy = std::make_unique<TaylorHoodHierarchy>(config.n0, config.level);
  MGConfig mg = config.mg;
  mg.smoother.cheby_a = config.cheby_a.value_or(default_cheby_a);
  s.mg = std::make_unique<MultigridPreconditioner>(*s.hierarchy, s.tableau, s.dt, mg);
  s.bc.constrained = s.hierarchy->finest().velocity_constrained;
  s.bc.g = mms_velocity;
  s.bc.g_t = mms_velocity_dt;
  return s;
}

std::vector<Vector> stage_boundary_values(const Setup &s, const StepState &state)
{
  return stage_boundary_data(s.tableau, s.dt, state.t, s.bc, s.hierarchy->finest().velocity,
                             state.u, s.config.stage_bc);
}

double divergence_norm(const StageOperator &op, const Vector &u)
{
  return (op.Bt() * u).norm();
}

void finish_row(RunRow &row, const Setup &s, const StepState &state, double pressure_time,
                const std::chrono::steady_clock::time_point &start)
{
  const auto &fine = s.hierarchy->finest();
  const double T = state.t;
  row.vel_error = l2_error(
      *fine.mesh, fine.velocity, state.u,
      VectorField([T](double x, double y) { return mms_velocity(x, y, T); }),
      ErrorMode::Relative);
  const bool ns = s.config.problem == Problem::NSTaylorGreen;
  row.pres_error = l2_error(
      *fine.mesh, fine.pressure, state.p,
      ScalarField([ns, pressure_time](double x, double y) {
        return ns ? taylor_green_pressure(x, y, pressure_time) : 0.0;
      }),
      ErrorMode::Absolute);
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double lin = 0.0, newt = 0.0;
  for (int k : row.linear_iters_per_step)
  {
    lin += k;
  }
  for (int k : row.newton_iters_per_step)
  {
    newt += k;
  }
  row.avg_linear_iters = row.steps > 0 ? lin / row.steps : 0.0;
  row.avg_newton_iters = row.steps > 0 ? newt / row.steps : 0.0;
}

RunRow start_row(const Setup &s)
{
  RunRow row;
  row.scheme = family_name(s.config.family);
  row.stages = s.config.stages;
  row.level = s.config.level;
  row.dt = s.dt;
  row.steps = s.steps;
  return row;
}

StepState initial_state(const Setup &s, bool with_pressure)
{
  const auto &fine = s.hierarchy->finest();
  StepState state;
  state.t = 0.0;
  state.dt = s.dt;
  state.u = interpolate(fine.velocity,
                        VectorField([](double x, double y) { return mms_velocity(x, y, 0.0); }));
  if (with_pressure)
  {
    state.p = interpolate(fine.pressure, ScalarField([](double x, double y) {
                            return taylor_green_pressure(x, y, 0.0);
                          }));
    remove_mean(state.p, fine.pressure_integrals);
  }
  else
  {
    state.p = Vector::Zero(fine.pressure.num_dofs());
  }
  return state;
}

}  // namespace

Problem parse_problem(const std::string &name)
{
  const std::string key = lower_alnum(name);
  if (key == "stokesmms" || key == "stokes")
  {
    return Problem::StokesMMS;
  }
  if (key == "nstaylorgreen" || key == "taylorgreen" || key == "ns")
  {
    return Problem::NSTaylorGreen;
  }
  throw InvalidParameter("unknown problem '" + name + "'");
}

std::string problem_name(Problem p)
{
  return p == Problem::StokesMMS ? "stokes-mms" : "ns-taylor-green";
}

void validate(const RunConfig &c)
{
  tableau_lookup(c.family, c.stages);
  require(c.n0 >= 1, "n0 must be at least 1");
  require(c.level >= 0 && c.level <= 6, "level must lie in [0, 6]");
  require(c.final_time > 0.0, "final-time must be positive");
  if (c.rule == TimestepRule::Fixed)
  {
    require(c.fixed_dt > 0.0, "dt must be positive");
  }
  require(c.krylov.rtol >= 0.0 && c.krylov.rtol < 1.0, "krylov.rtol must lie in [0, 1)");
  require(c.krylov.maxiter >= 1, "krylov.maxiter must be at least 1");
  require(c.krylov.restart >= 1, "krylov.restart must be at least 1");
  require(!c.krylov_atol || *c.krylov_atol >= 0.0, "krylov.atol must be non-negative");
  require(!c.newton_atol || *c.newton_atol > 0.0, "newton.atol must be positive");
  require(c.mg.smoother.sweeps >= 0, "smoother.sweeps must be non-negative");
  require(c.mg.levels == -1 || (c.mg.levels >= 1 && c.mg.levels <= c.level + 1),
          "mg.levels must be -1 or between 1 and level + 1");
  const double a = c.cheby_a.value_or(c.problem == Problem::StokesMMS ? 2.0 : 1.5);
  require(c.mg.smoother.accel == SmootherAccel::GMRES ||
              (a > 0.0 && a < c.mg.smoother.cheby_b),
          "smoother.cheby_a and smoother.cheby_b must satisfy 0 < a < b");
}

std::pair<int, double> timestep_schedule(const RunConfig &c)
{
  if (c.rule == TimestepRule::Scaled)
  {
    const int n = 1 << (c.level + 3);
    return {n, c.final_time / n};
  }
  const double steps = c.final_time / c.fixed_dt;
  const long n = std::lround(steps);
  if (n < 1 || std::abs(steps - static_cast<double>(n)) > 1e-9 * steps)
  {
    throw InvalidParameter("dt must divide final-time into a whole number of steps");
  }
  return {static_cast<int>(n), c.final_time / static_cast<double>(n)};
}

std::array<double, 2> mms_velocity(double x, double y, double t)
{
  const double e = std::exp(-2.0 * pi * pi * t);
  return {std::sin(pi * x) * std::cos(pi * y) * e, -std::cos(pi * x) * std::sin(pi * y) * e};
}

std::array<double, 2> mms_velocity_dt(double x, double y, double t)
{
  const auto u = mms_velocity(x, y, t);
  return {-2.0 * pi * pi * u[0], -2.0 * pi * pi * u[1]};
}

double taylor_green_pressure(double x, double y, double t)
{
  return 0.25 * std::exp(-4.0 * pi * pi * t) * (std::cos(2.0 * pi * x) + std::cos(2.0 * pi * y));
}

RunRow run_stokes_mms(const RunConfig &config)
{
  require(config.problem == Problem::StokesMMS, "run_stokes_mms: wrong problem");
  const auto start = std::chrono::steady_clock::now();
  Setup s = make_setup(config, 2.0);
  const StageOperator &op = s.mg->finest_op();
  const auto &fine = s.hierarchy->finest();
  RunRow row = start_row(s);

  KrylovConfig kc = config.krylov;
  kc.atol = config.krylov_atol.value_or(schedule_tolerance(s.steps));
  const LinearMap A = [&](const Vector &x, Vector &y) { op.apply(x, y); };
  const LinearMap P = [&](const Vector &x, Vector &y) { s.mg->apply(x, y); };
  const Projection project = [&](Vector &v) { op.project_nullspace(v); };

  StepState state = initial_state(s, false);
  Vector previous;
  for (int n = 0; n < s.steps; n++)
  {
    const auto bc = stage_boundary_values(s, state);
    const Vector rhs = assemble_stage_rhs(op, state, {}, bc);
    Vector k = stage_initial_guess(op, config.warm_start && previous.size() ? &previous : nullptr,
                                   bc);
    const KrylovStats ks = fgmres(A, P, rhs, k, kc, project);
    if (!ks.converged)
    {
      std::ostringstream msg;
      msg << "FGMRES failed at step " << n + 1 << " after " << ks.iterations
          << " iterations (residual " << ks.final_residual << ")";
      throw SolverFailure(msg.str());
    }
    row.linear_iters_per_step.push_back(ks.iterations);
    row.newton_iters_per_step.push_back(0);
    state = advance_step(state, s.tableau, k, &fine.pressure_integrals);
    const double target = std::max(kc.rtol * ks.initial_residual, kc.atol);
    row.max_divergence_ratio =
        std::max(row.max_divergence_ratio, divergence_norm(op, state.u) / target);
    previous = std::move(k);
    if (config.verbose)
    {
      std::cerr << "step " << n + 1 << "/" << s.steps << " t=" << state.t
                << " its=" << ks.iterations << " res=" << ks.final_residual << "\n";
    }
  }
  finish_row(row, s, state, state.t, start);
  return row;
}

RunRow run_ns_taylor_green(const RunConfig &config)
{
  require(config.problem == Problem::NSTaylorGreen, "run_ns_taylor_green: wrong problem");
  const auto start = std::chrono::steady_clock::now();
  Setup s = make_setup(config, 1.5);
  const auto &fine = s.hierarchy->finest();
  NavierStokesStage system(fine, s.tableau, s.dt);
  const StageOperator &stokes = system.stokes();
  const StageOperator &jac = s.mg->finest_op();
  RunRow row = start_row(s);

  NewtonConfig nc = config.newton;
  nc.atol = config.newton_atol.value_or(schedule_tolerance(s.steps));
  KrylovConfig kc = config.krylov;
  kc.atol = 0.0;

  StepState state = initial_state(s, true);
  Vector previous;

  NewtonProblem problem;
  problem.project = [&](Vector &v) { stokes.project_nullspace(v); };
  problem.residual = [&](const Vector &k, Vector &F) { system.residual(k, F); };
  problem.linearize = [&](const Vector &k) {
    s.mg->set_convection_state(system.stage_velocities(k));
  };
  problem.jacobian = [&](const Vector &x, Vector &y) { jac.apply(x, y); };
  problem.solve = [&](const Vector &rhs, Vector &d, double eta) {
    KrylovConfig inner = kc;
    inner.rtol = eta;
    return fgmres([&](const Vector &x, Vector &y) { jac.apply(x, y); },
                  [&](const Vector &x, Vector &y) { s.mg->apply(x, y); }, rhs, d, inner,
                  problem.project);
  };

  for (int n = 0; n < s.steps; n++)
  {
    const auto bc = stage_boundary_values(s, state);
    system.set_step(state, bc);
    Vector k = warm_start(config.warm_start ? &previous : nullptr, stokes.size());
    k = stage_initial_guess(stokes, &k, bc);
    NewtonStats ns;
    try
    {
      ns = newton_solve(problem, k, nc);
    }
    catch (const SolverFailure &e)
    {
      throw SolverFailure("step " + std::to_string(n + 1) + ": " + e.what());
    }
    row.linear_iters_per_step.push_back(ns.total_linear_iterations());
    row.newton_iters_per_step.push_back(ns.iterations);
    state = advance_step(state, s.tableau, k, &fine.pressure_integrals);
    row.max_divergence_ratio =
        std::max(row.max_divergence_ratio, divergence_norm(stokes, state.u) / nc.atol);
    previous = std::move(k);
    if (config.verbose)
    {
      std::cerr << "step " << n + 1 << "/" << s.steps << " t=" << state.t
                << " newton=" << ns.iterations << " linear=" << ns.total_linear_iterations()
                << " res=" << ns.residual_norms.back() << "\n";
    }
  }
  finish_row(row, s, state, state.t, start);
  return row;
}

RunRow run_problem(const RunConfig &config)
{
  return config.problem == Problem::StokesMMS ? run_stokes_mms(config)
                                              : run_ns_taylor_green(config);
}

std::optional<double> convergence_rate(double coarse_error, double fine_error)
{
  if (!(coarse_error > 0.0) || !(fine_error > 0.0) || !std::isfinite(coarse_error) ||
      !std::isfinite(fine_error))
  {
    return std::nullopt;
  }
  return std::log2(coarse_error / fine_error);
}

RatesTable convergence_rates(const std::vector<RunRow> &rows)
{
  require(rows.size() >= 2, "convergence_rates: need at least two rows");
  RatesTable out;
  for (std::size_t i = 0; i + 1 < rows.size(); i++)
  {
    require(rows[i].scheme == rows[i + 1].scheme && rows[i].stages == rows[i + 1].stages,
            "convergence_rates: rows mix different schemes");
    require(rows[i + 1].level == rows[i].level + 1,
            "convergence_rates: rows must be consecutive levels");
    out.velocity.push_back(convergence_rate(rows[i].vel_error, rows[i + 1].vel_error));
    out.pressure.push_back(convergence_rate(rows[i].pres_error, rows[i + 1].pres_error));
  }
  return out;
}

const char *const csv_header =
    "scheme,stages,level,dt,vel_error,pres_error,avg_linear_iters,avg_newton_iters,wall_seconds";

std::string format_sig6(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream &os, const std::vector<RunRow> &rows)
{
  os << csv_header << '\n';
  for (const auto &r : rows)
  {
    os << r.scheme << ',' << r.stages << ',' << r.level << ',' << format_sig6(r.dt) << ','
       << format_sig6(r.vel_error) << ',' << format_sig6(r.pres_error) << ','
       << format_sig6(r.avg_linear_iters) << ',' << format_sig6(r.avg_newton_iters) << ','
       << format_sig6(r.wall_seconds) << '\n';
  }
}

void emit_csv(const ConvergenceReport &report, const std::string &path)
{
  std::ofstream os(path);
  if (!os)
  {
    throw InvalidParameter("cannot open '" + path + "' for writing");
  }
  write_csv(os, report.rows);
  if (!os)
  {
    throw InvalidParameter("failed writing '" + path + "'");
  }
}

std::vector<RunRow> read_csv(std::istream &is)
{
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line == csv_header,
          "read_csv: missing or unexpected header");
  const auto to_double = [](const std::string &f) {
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    require(res.ec == std::errc() && res.ptr == f.data() + f.size(),
            "read_csv: bad number '" + f + "'");
    return v;
  };
  const auto to_int = [](const std::string &f) {
    int v = 0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    require(res.ec == std::errc() && res.ptr == f.data() + f.size(),
            "read_csv: bad integer '" + f + "'");
    return v;
  };
  std::vector<RunRow> rows;
  while (std::getline(is, line))
  {
    if (line.empty())
    {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
    {
      f.push_back(field);
    }
    require(f.size() == 9, "read_csv: expected 9 fields");
    RunRow r;
    r.scheme = f[0];
    r.stages = to_int(f[1]);
    r.level = to_int(f[2]);
    r.dt = to_double(f[3]);
    r.vel_error = to_double(f[4]);
    r.pres_error = to_double(f[5]);
    r.avg_linear_iters = to_double(f[6]);
    r.avg_newton_iters = to_double(f[7]);
    r.wall_seconds = to_double(f[8]);
    rows.push_back(r);
  }
  return rows;
}

void print_report(std::ostream &os, const std::vector<RunRow> &rows)
{
  const auto rate_str = [](const std::optional<double> &r) {
    if (!r)
    {
      return std::string("undefined");
    }
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << *r;
    return ss.str();
  };
  os << std::left << std::setw(6) << "level" << std::setw(12) << "dt" << std::setw(14)
     << "vel_error" << std::setw(10) << "vel_rate" << std::setw(14) << "pres_error"
     << std::setw(10) << "pres_rate" << std::setw(10) << "lin_its" << std::setw(10)
     << "newton" << "seconds\n";
  std::optional<RatesTable> rates;
  if (rows.size() >= 2)
  {
    rates = convergence_rates(rows);
  }
  for (std::size_t i = 0; i < rows.size(); i++)
  {
    const auto &r = rows[i];
    const std::string vr = i > 0 && rates ? rate_str(rates->velocity[i - 1]) : "-";
    const std::string pr = i > 0 && rates ? rate_str(rates->pressure[i - 1]) : "-";
    os << std::setw(6) << r.level << std::setw(12) << format_sig6(r.dt) << std::setw(14)
       << format_sig6(r.vel_error) << std::setw(10) << vr << std::setw(14)
       << format_sig6(r.pres_error) << std::setw(10) << pr << std::setw(10)
       << format_sig6(r.avg_linear_iters) << std::setw(10) << format_sig6(r.avg_newton_iters)
       << format_sig6(r.wall_seconds) << "\n";
  }
}

}  // namespace irkmg
