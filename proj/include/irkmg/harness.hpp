#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "irkmg/multigrid.hpp"
#include "irkmg/newton.hpp"
#include "irkmg/tableau.hpp"

namespace irkmg
{

enum class Problem
{
  StokesMMS,
  NSTaylorGreen
};

enum class TimestepRule
{
  /// N = 2^(level+3) steps on [0, T_f].
  Scaled,
  /// A fixed dt independent of the level.
  Fixed
};

Problem parse_problem(const std::string &name);
std::string problem_name(Problem p);

struct RunConfig
{
  Problem problem = Problem::StokesMMS;
  TableauFamily family = TableauFamily::RadauIIA;
  int stages = 2;
  int n0 = 8;
  int level = 1;
  double final_time = 0.5;
  TimestepRule rule = TimestepRule::Scaled;
  double fixed_dt = 0.5 / 16.0;
  /// Start each step's stage solve from the previous step's stage vector.
  bool warm_start = true;
  StageBC stage_bc = StageBC::StageValue;

  MGConfig mg;
  KrylovConfig krylov;
  NewtonConfig newton;
  /// Unset values follow the problem defaults: Chebyshev lower bound 2 (Stokes) or 1.5
  /// (Navier-Stokes), absolute tolerances 1e-2 N^-3.
  std::optional<double> cheby_a;
  std::optional<double> krylov_atol;
  std::optional<double> newton_atol;

  /// Per-step progress on stderr.
  bool verbose = false;
};

/// Throws InvalidParameter for inconsistent settings.
void validate(const RunConfig &config);

/// Number of timesteps and their size for a configuration.
std::pair<int, double> timestep_schedule(const RunConfig &config);

struct RunRow
{
  std::string scheme;
  int stages = 0;
  int level = 0;
  double dt = 0.0;
  double vel_error = 0.0;
  double pres_error = 0.0;
  double avg_linear_iters = 0.0;
  double avg_newton_iters = 0.0;
  double wall_seconds = 0.0;

  int steps = 0;
  /// max over steps of ||B^T u^{n+1}|| divided by that step's solver tolerance.
  double max_divergence_ratio = 0.0;
  std::vector<int> linear_iters_per_step;
  std::vector<int> newton_iters_per_step;
};

struct ConvergenceReport
{
  std::vector<RunRow> rows;
};

struct RatesTable
{
  /// rates[i] compares rows i and i+1; empty when undefined (zero coarse error).
  std::vector<std::optional<double>> velocity;
  std::vector<std::optional<double>> pressure;
};

RunRow run_stokes_mms(const RunConfig &config);
RunRow run_ns_taylor_green(const RunConfig &config);
RunRow run_problem(const RunConfig &config);

/// log2(e_l / e_{l+1}) for consecutive rows (which must share scheme and stages).
RatesTable convergence_rates(const std::vector<RunRow> &rows);
std::optional<double> convergence_rate(double coarse_error, double fine_error);

extern const char *const csv_header;
void write_csv(std::ostream &os, const std::vector<RunRow> &rows);
void emit_csv(const ConvergenceReport &report, const std::string &path);
/// Parses a file produced by write_csv (only the CSV columns are filled in).
std::vector<RunRow> read_csv(std::istream &is);
/// Shortest general-format representation with 6 significant digits.
std::string format_sig6(double v);

/// Plain-text table of rows and rates.
void print_report(std::ostream &os, const std::vector<RunRow> &rows);

/// Exact Taylor-Green / MMS fields.
std::array<double, 2> mms_velocity(double x, double y, double t);
std::array<double, 2> mms_velocity_dt(double x, double y, double t);
double taylor_green_pressure(double x, double y, double t);

}  // namespace irkmg
