#include <doctest.h>

#include <cmath>
#include <random>

#include "irkmg/error.hpp"
#include "irkmg/harness.hpp"
#include "irkmg/multigrid.hpp"
#include "irkmg/newton.hpp"
#include "irkmg/ns_stage.hpp"

using namespace irkmg;

namespace
{

Vector random_vector(int n, unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; i++)
  {
    v[i] = dist(rng);
  }
  return v;
}

// Taylor-Green stage system at t = 0 with boundary data from the exact velocity.
struct TaylorGreenStep
{
  TaylorHoodHierarchy hierarchy;
  ButcherTableau tableau;
  double dt;
  NavierStokesStage system;
  StepState state;
  std::vector<Vector> bc;

  TaylorGreenStep(int n0, int level, double dt_, double t0 = 0.0)
    : hierarchy(n0, level), tableau(tableau_lookup(TableauFamily::RadauIIA, 2)), dt(dt_),
      system(hierarchy.finest(), tableau, dt)
  {
    const auto &fine = hierarchy.finest();
    state.t = t0;
    state.dt = dt;
    state.u = interpolate(fine.velocity, VectorField([t0](double x, double y) {
                            return mms_velocity(x, y, t0);
                          }));
    state.p = interpolate(fine.pressure, ScalarField([t0](double x, double y) {
                            return taylor_green_pressure(x, y, t0);
                          }));
    remove_mean(state.p, fine.pressure_integrals);
    DirichletSpec spec;
    spec.constrained = fine.velocity_constrained;
    spec.g = mms_velocity;
    spec.g_t = mms_velocity_dt;
    bc = stage_boundary_data(tableau, dt, t0, spec, fine.velocity, state.u,
                             StageBC::StageValue);
    system.set_step(state, bc);
  }

  NewtonStats solve(Vector &k, const NewtonConfig &nc)
  {
    MultigridPreconditioner mg(hierarchy, tableau, dt);
    const StageOperator &jac = mg.finest_op();
    const StageOperator &stokes = system.stokes();
    NewtonProblem problem;
    problem.project = [&](Vector &v) { stokes.project_nullspace(v); };
    problem.residual = [&](const Vector &x, Vector &F) { system.residual(x, F); };
    problem.linearize = [&](const Vector &x) {
      mg.set_convection_state(system.stage_velocities(x));
    };
    problem.jacobian = [&](const Vector &x, Vector &y) { jac.apply(x, y); };
    problem.solve = [&](const Vector &rhs, Vector &d, double eta) {
      KrylovConfig kc;
      kc.rtol = eta;
      return fgmres([&](const Vector &x, Vector &y) { jac.apply(x, y); },
                    [&](const Vector &x, Vector &y) { mg.apply(x, y); }, rhs, d, kc,
                    problem.project);
    };
    k = stage_initial_guess(stokes, nullptr, bc);
    return newton_solve(problem, k, nc);
  }
};

NewtonProblem dense_problem(const Eigen::MatrixXd &A, const Vector &b,
                            std::function<void(const Vector &, Vector &)> extra = {})
{
  NewtonProblem p;
  p.residual = [A, b, extra](const Vector &k, Vector &F) {
    F = A * k - b;
    if (extra)
    {
      Vector e;
      extra(k, e);
      F += e;
    }
  };
  auto jac = std::make_shared<Eigen::MatrixXd>(A);
  p.linearize = [A, jac](const Vector &k) {
    *jac = A;
    for (int i = 0; i < k.size(); i++)
    {
      (*jac)(i, i) += 0.0 * k[i];
    }
  };
  p.jacobian = [jac](const Vector &x, Vector &y) { y = *jac * x; };
  p.solve = [jac](const Vector &rhs, Vector &d, double) {
    d = jac->partialPivLu().solve(rhs);
    KrylovStats st;
    st.iterations = 1;
    st.converged = true;
    return st;
  };
  return p;
}

}  // namespace

TEST_CASE("Eisenstat-Walker forcing terms")
{
  NewtonConfig unit;
  unit.ew_gamma = 1.0;
  unit.ew_alpha = 2.0;
  auto f = ew_forcing(0.1, 0.1, 1.0, unit);
  CHECK(f.eta == doctest::Approx(0.01).epsilon(1e-14));
  CHECK_FALSE(f.safeguarded);
  f = ew_forcing(0.1, 0.0, 1.0, unit);
  CHECK(f.eta == 1e-12);

  // Defaults: gamma 0.9, alpha 2, eta0 0.5, residual ratios 0.5 then 0.25.
  const NewtonConfig def;
  const auto e1 = ew_forcing(def.eta0, 0.5, 1.0, def);
  CHECK(e1.eta == doctest::Approx(0.225).epsilon(1e-14));
  CHECK(e1.safeguarded);
  const auto e2 = ew_forcing(e1.eta, 0.125, 0.5, def);
  CHECK(e2.eta == doctest::Approx(0.05625).epsilon(1e-14));
  CHECK_FALSE(e2.safeguarded);

  NewtonConfig lin;
  lin.ew_alpha = 1.0;
  const auto a1 = ew_forcing(lin.eta0, 0.5, 1.0, lin);
  CHECK(a1.eta == doctest::Approx(0.45).epsilon(1e-14));
  const auto a2 = ew_forcing(a1.eta, 0.125, 0.5, lin);
  CHECK(a2.eta == doctest::Approx(0.405).epsilon(1e-14));
  CHECK(a2.safeguarded);

  // Capped by eta_max; safeguard can be switched off.
  CHECK(ew_forcing(0.5, 2.0, 1.0, def).eta == def.eta_max);
  NewtonConfig off;
  off.safeguard = false;
  CHECK(ew_forcing(0.9, 0.1, 1.0, off).eta == doctest::Approx(0.009));
  CHECK_THROWS_AS(ew_forcing(0.5, 1.0, 0.0, def), InvalidParameter);
}

TEST_CASE("Newton on small dense problems")
{
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const Vector b(Vector::LinSpaced(3, 1.0, 3.0));

  NewtonConfig nc;
  nc.atol = 1e-12;
  Vector k = Vector::Zero(3);
  auto st = newton_solve(dense_problem(A, b), k, nc);
  CHECK(st.converged);
  CHECK(st.iterations == 1);
  CHECK((A * k - b).norm() <= 1e-12);

  // Already converged.
  st = newton_solve(dense_problem(A, b), k, nc);
  CHECK(st.iterations == 0);
  CHECK(st.residual_norms.size() == 1);

  // Nonlinear term with a missing Jacobian contribution: slow linear convergence hits maxit.
  NewtonConfig few = nc;
  few.maxit = 2;
  Vector k2 = Vector::Zero(3);
  const auto cubic = [](const Vector &x, Vector &e) { e = 3.0 * x.array().cube().matrix(); };
  CHECK_THROWS_AS(newton_solve(dense_problem(A, b, cubic), k2, few), SolverFailure);

  // Inner solve failure propagates.
  auto broken = dense_problem(A, b);
  broken.solve = [](const Vector &, Vector &, double) { return KrylovStats{}; };
  Vector k3 = Vector::Zero(3);
  CHECK_THROWS_AS(newton_solve(broken, k3, nc), SolverFailure);

  NewtonConfig bad;
  bad.ew_alpha = 0.5;
  CHECK_THROWS_AS(newton_solve(dense_problem(A, b), k3, bad), InvalidParameter);
}

TEST_CASE("warm start")
{
  CHECK(warm_start(nullptr, 4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(warm_start(nullptr, 4).size() == 4);
  const Vector prev = Vector::LinSpaced(4, 1.0, 4.0);
  CHECK((warm_start(&prev, 4) - prev).norm() == 0.0);
  const Vector empty;
  CHECK(warm_start(&empty, 3).size() == 3);
  CHECK_THROWS_AS(warm_start(&prev, 5), InvalidParameter);
}

TEST_CASE("stage Jacobian matches finite differences")
{
  TaylorGreenStep step(2, 0, 0.1);
  const auto &sys = step.system;
  MultigridPreconditioner mg(step.hierarchy, step.tableau, step.dt);
  Vector k = random_vector(sys.size(), 1);
  k = stage_initial_guess(sys.stokes(), &k, step.bc);
  mg.set_convection_state(sys.stage_velocities(k));
  Vector d = random_vector(sys.size(), 2);
  for (int idx : sys.stokes().constrained_indices())
  {
    d[idx] = 0.0;
  }
  const double eps = 1e-5;
  Vector Fp, Fm;
  sys.residual(k + eps * d, Fp);
  sys.residual(k - eps * d, Fm);
  const Vector fd = (Fp - Fm) / (2.0 * eps);
  const Vector Jd = mg.finest_op().apply(d);
  CHECK((fd - Jd).norm() <= 1e-6 * Jd.norm());

  // Without convection the residual is affine with the Stokes operator as derivative.
  Vector F0;
  sys.residual(k, F0);
  CHECK((Fp - F0).norm() > 0.0);
}

TEST_CASE("Newton on a Taylor-Green step")
{
  // Level 1 schedule: N = 16 steps to T = 0.5 would give dt = 1/32; the step is taken at
  // dt = 1/64 here with the same absolute tolerance.
  TaylorGreenStep step(8, 1, 1.0 / 64.0);
  NewtonConfig nc;
  nc.atol = 1e-2 * std::pow(16.0, -3.0);
  Vector k;
  const auto st = step.solve(k, nc);
  CHECK(st.converged);
  CHECK(st.iterations <= 6);
  CHECK(st.residual_norms.back() <= nc.atol);
  for (std::size_t i = 0; i + 1 < st.etas.size(); i++)
  {
    CHECK(st.etas[i] <= nc.eta_max);
  }
  // Superlinear final phase: ||F_k|| <= C ||F_{k-1}||^1.5 with C = 1.
  const auto &h = st.residual_norms;
  REQUIRE(h.size() >= 3);
  CHECK(h[h.size() - 1] <= std::pow(h[h.size() - 2], 1.5));
}

TEST_CASE("Newton near steady state")
{
  // By t = 2 the flow has decayed below e^-39; the zero stage vector is already close.
  TaylorGreenStep step(4, 1, 1.0 / 32.0, 2.0);
  NewtonConfig nc;
  nc.atol = 1e-2 * std::pow(16.0, -3.0);
  Vector k;
  const auto st = step.solve(k, nc);
  CHECK(st.converged);
  CHECK(st.iterations <= 1);
}

TEST_CASE("tight forcing gives fast local convergence")
{
  TaylorGreenStep step(4, 1, 0.05);
  NewtonConfig nc;
  nc.fixed_eta = 1e-10;
  nc.atol = 1e-11;
  Vector k;
  const auto st = step.solve(k, nc);
  REQUIRE(st.converged);
  const auto &h = st.residual_norms;
  REQUIRE(h.size() >= 3);
  for (double eta : st.etas)
  {
    CHECK(eta == 1e-10);
  }
  // Contraction improves from one step to the next until roundoff is reached.
  for (std::size_t i = 2; i < h.size() && h[i] > 1e-12 * h[0]; i++)
  {
    CHECK(h[i] / h[i - 1] < h[i - 1] / h[i - 2]);
  }
}
