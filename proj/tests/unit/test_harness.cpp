#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "irkmg/cli.hpp"
#include "irkmg/config.hpp"
#include "irkmg/error.hpp"
#include "irkmg/harness.hpp"

using namespace irkmg;

namespace
{

struct CliResult
{
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "irkmg");
  std::vector<const char *> argv;
  for (const auto &a : args)
  {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string &name)
{
  const auto dir = std::filesystem::temp_directory_path() / "irkmg_harness_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path &p)
{
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunRow sample_row(double vel)
{
  RunRow r;
  r.scheme = "RadauIIA";
  r.stages = 2;
  r.level = 1;
  r.dt = 0.03125;
  r.vel_error = vel;
  r.pres_error = 1.5e-7;
  r.avg_linear_iters = 4.8125;
  r.avg_newton_iters = 0.0;
  r.wall_seconds = 1.25;
  return r;
}

}  // namespace

TEST_CASE("convergence rates")
{
  CHECK(*convergence_rate(4.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(*convergence_rate(1e-3, 1.25e-4) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::round(100.0 * *convergence_rate(3.380e-6, 4.297e-7)) == 298.0);
  CHECK_FALSE(convergence_rate(0.0, 1e-3).has_value());
  CHECK_FALSE(convergence_rate(1e-3, 0.0).has_value());

  std::vector<RunRow> rows{sample_row(4.0), sample_row(1.0), sample_row(0.125)};
  rows[1].level = 2;
  rows[2].level = 3;
  rows[2].pres_error = 0.0;
  const auto rates = convergence_rates(rows);
  REQUIRE(rates.velocity.size() == 2);
  CHECK(*rates.velocity[0] == doctest::Approx(2.0));
  CHECK(*rates.velocity[1] == doctest::Approx(3.0));
  CHECK(*rates.pressure[0] == doctest::Approx(0.0));
  CHECK_FALSE(rates.pressure[1].has_value());

  rows[1].scheme = "Gauss";
  CHECK_THROWS_AS(convergence_rates(rows), InvalidParameter);
  rows[1].scheme = "RadauIIA";
  rows[2].level = 5;
  CHECK_THROWS_AS(convergence_rates(rows), InvalidParameter);

  std::ostringstream os;
  print_report(os, {sample_row(4.0)});
  CHECK(os.str().find("vel_error") != std::string::npos);
}

TEST_CASE("CSV output")
{
  std::ostringstream empty;
  write_csv(empty, {});
  CHECK(empty.str() == std::string(csv_header) + "\n");

  std::ostringstream one;
  write_csv(one, {sample_row(0.0049979)});
  std::istringstream lines(one.str());
  std::string header, line;
  std::getline(lines, header);
  std::getline(lines, line);
  CHECK(std::count(line.begin(), line.end(), ',') == 8);
  CHECK(line == "RadauIIA,2,1,0.03125,0.0049979,1.5e-07,4.8125,0,1.25");

  std::istringstream back(one.str());
  const auto rows = read_csv(back);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].scheme == "RadauIIA");
  CHECK(rows[0].vel_error == 0.0049979);
  CHECK(rows[0].avg_linear_iters == 4.8125);

  CHECK(format_sig6(1.0 / 3.0) == "0.333333");
  CHECK(format_sig6(123456789.0) == "1.23457e+08");

  std::istringstream bad("scheme,stages\n");
  CHECK_THROWS_AS(read_csv(bad), InvalidParameter);
}

TEST_CASE("configuration files")
{
  std::istringstream is("# comment\n\nfamily = gauss\nstages=3\nsmoother.sweeps = 4\n"
                        "krylov.rtol = 1e-6\nnewton.ew_alpha = 1.5\ndt = 0.0625\n");
  RunConfig cfg;
  for (const auto &[k, v] : parse_config(is))
  {
    apply_config_value(cfg, k, v);
  }
  CHECK(cfg.family == TableauFamily::Gauss);
  CHECK(cfg.stages == 3);
  CHECK(cfg.mg.smoother.sweeps == 4);
  CHECK(cfg.krylov.rtol == 1e-6);
  CHECK(cfg.newton.ew_alpha == 1.5);
  CHECK(cfg.rule == TimestepRule::Fixed);
  CHECK(timestep_schedule(cfg).first == 8);

  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_AS(parse_config(unknown), InvalidParameter);
  std::istringstream malformed("family\n");
  CHECK_THROWS_AS(parse_config(malformed), InvalidParameter);
  CHECK_THROWS_AS(apply_config_value(cfg, "stages", "two"), InvalidParameter);
  CHECK_THROWS_AS(apply_config_value(cfg, "krylov.rtol", "1e-3x"), InvalidParameter);
  CHECK_THROWS_AS(apply_config_value(cfg, "warm-start", "maybe"), InvalidParameter);
  CHECK_THROWS_AS(parse_config_file(scratch("missing.cfg").string()), InvalidParameter);

  RunConfig c2;
  c2.fixed_dt = 0.3;
  c2.rule = TimestepRule::Fixed;
  CHECK_THROWS_AS(timestep_schedule(c2), InvalidParameter);
  c2.rule = TimestepRule::Scaled;
  c2.level = 2;
  CHECK(timestep_schedule(c2).first == 32);
  CHECK(timestep_schedule(c2).second == 0.5 / 32);
  c2.mg.levels = 5;
  CHECK_THROWS_AS(validate(c2), InvalidParameter);
}

TEST_CASE("exact fields")
{
  const auto u = mms_velocity(0.3, 0.7, 0.1);
  const double pi = std::acos(-1.0);
  CHECK(u[0] == doctest::Approx(std::sin(0.3 * pi) * std::cos(0.7 * pi) *
                                std::exp(-2.0 * pi * pi * 0.1)));
  const double h = 1e-6;
  const auto up = mms_velocity(0.3, 0.7, 0.1 + h), um = mms_velocity(0.3, 0.7, 0.1 - h);
  CHECK(mms_velocity_dt(0.3, 0.7, 0.1)[1] ==
        doctest::Approx((up[1] - um[1]) / (2.0 * h)).epsilon(1e-7));
  CHECK(taylor_green_pressure(0.0, 0.0, 0.0) == 0.5);
}

TEST_CASE("command line exit codes")
{
  auto r = run_cli({"tableau-report", "--family", "radauiia", "--stages", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("RadauIIA(2)") != std::string::npos);
  CHECK(run_cli({"tableau-report", "--family", "alexander"}).code == 0);

  r = run_cli({"stokes-mms", "--level", "0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--family") != std::string::npos);
  CHECK(run_cli({"stokes-mms", "--family", "radauiia", "--bogus", "1"}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"tableau-report", "--family", "gauss", "--stages", "7"}).code == 2);
  CHECK(run_cli({"stokes-mms", "--family", "radauiia", "--krylov.rtol", "abc"}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);

  // A run that cannot converge in one Krylov iteration is a solver failure.
  r = run_cli({"stokes-mms", "--family", "radauiia", "--n0", "2", "--level", "1",
               "--krylov.maxiter", "1", "--krylov.rtol", "1e-12"});
  CHECK(r.code == 3);
}

TEST_CASE("command line runs and outputs")
{
  const auto cfg = scratch("run.cfg");
  {
    std::ofstream os(cfg);
    os << "family = radauiia\nn0 = 2\n";
  }
  const auto csv = scratch("rows.csv");
  const auto mesh = scratch("mesh.txt");
  const auto mat = scratch("matrix.txt");
  std::filesystem::remove(csv);
  auto r = run_cli({"stokes-mms", "--config", cfg.string(), "--level", "0", "--csv",
                    csv.string(), "--dump-mesh", mesh.string(), "--dump-matrix", mat.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("max_divergence_ratio") != std::string::npos);
  std::istringstream rows_in(slurp(csv));
  const auto rows = read_csv(rows_in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].level == 0);
  CHECK(rows[0].dt == 0.0625);
  CHECK_FALSE(slurp(mesh).empty());
  CHECK_FALSE(slurp(mat).empty());

  // Flags override the config file.
  r = run_cli({"converge", "--config", cfg.string(), "--family", "lobattoiiic", "--lmin", "0",
               "--lmax", "1", "--csv", csv.string()});
  CHECK(r.code == 0);
  std::istringstream conv_in(slurp(csv));
  const auto conv = read_csv(conv_in);
  REQUIRE(conv.size() == 2);
  CHECK(conv[0].scheme == "LobattoIIIC");
  CHECK(conv[1].level == 1);

  {
    std::ofstream os(cfg);
    os << "family = radauiia\ncolour = red\n";
  }
  CHECK(run_cli({"stokes-mms", "--config", cfg.string()}).code == 2);
}

TEST_CASE("level-0 Stokes run")
{
  RunConfig cfg;
  cfg.level = 0;
  const RunRow a = run_stokes_mms(cfg);
  CHECK(a.steps == 8);
  CHECK(a.linear_iters_per_step.size() == 8);
  CHECK(a.dt == 0.0625);
  CHECK(a.max_divergence_ratio <= 10.0);
  CHECK(a.vel_error > 0.0);
  CHECK(a.vel_error < 0.1);
  CHECK(a.pres_error < 1e-3);

  // Identical configuration, identical numbers.
  const RunRow b = run_stokes_mms(cfg);
  CHECK(a.vel_error == b.vel_error);
  CHECK(a.pres_error == b.pres_error);
  CHECK(a.linear_iters_per_step == b.linear_iters_per_step);

  cfg.problem = Problem::NSTaylorGreen;
  CHECK_THROWS_AS(run_stokes_mms(cfg), InvalidParameter);
}

TEST_CASE("level-0 Navier-Stokes run")
{
  RunConfig cfg;
  cfg.problem = Problem::NSTaylorGreen;
  cfg.n0 = 4;
  cfg.level = 0;
  const RunRow row = run_problem(cfg);
  CHECK(row.steps == 8);
  CHECK(row.avg_newton_iters >= 1.0);
  CHECK(row.avg_newton_iters <= 6.0);
  CHECK(row.max_divergence_ratio <= 10.0);
  CHECK(std::isfinite(row.vel_error));
  CHECK(std::isfinite(row.pres_error));
}
