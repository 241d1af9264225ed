#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/SparseLU>

#include "irkmg/error.hpp"
#include "irkmg/hierarchy.hpp"
#include "irkmg/stage.hpp"
#include "irkmg/tableau.hpp"

using namespace irkmg;

namespace
{

Eigen::MatrixXd kron(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b)
{
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); i++)
  {
    for (int j = 0; j < a.cols(); j++)
    {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Dense I_r (x) diag(M, 0) + dt A (x) [[K, B], [B^T, 0]].
Eigen::MatrixXd kronecker_oracle(const BlockSystem &bl, const Eigen::MatrixXd &A, double dt)
{
  const int nu = bl.n_u, np = bl.n_p, n = nu + np;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  D.topLeftCorner(nu, nu) = Eigen::MatrixXd(bl.M);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  S.topLeftCorner(nu, nu) = Eigen::MatrixXd(bl.K);
  S.topRightCorner(nu, np) = Eigen::MatrixXd(bl.B);
  S.bottomLeftCorner(np, nu) = Eigen::MatrixXd(bl.B).transpose();
  const int r = static_cast<int>(A.rows());
  return kron(Eigen::MatrixXd::Identity(r, r), D) + dt * kron(A, S);
}

std::shared_ptr<const BlockSystem> blocks_on(const Mesh2D &m)
{
  const DofMap vel(m, SpaceKind::P2Vec), pres(m, SpaceKind::P1);
  return std::make_shared<const BlockSystem>(assemble_stokes_blocks(m, vel, pres));
}

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

}  // namespace

TEST_CASE("tableau coefficients")
{
  const auto be = tableau_lookup(TableauFamily::BackwardEuler, 1);
  CHECK(be.A(0, 0) == 1.0);
  CHECK(be.b[0] == 1.0);
  CHECK(be.c[0] == 1.0);

  const auto radau = tableau_lookup(TableauFamily::RadauIIA, 2);
  CHECK(radau.A(0, 0) == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  CHECK(radau.A(0, 1) == doctest::Approx(-1.0 / 12.0).epsilon(1e-15));
  CHECK(radau.A(1, 0) == doctest::Approx(3.0 / 4.0).epsilon(1e-15));
  CHECK(radau.A(1, 1) == doctest::Approx(1.0 / 4.0).epsilon(1e-15));
  CHECK(radau.c[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(radau.c[1] == 1.0);
  // C(2): sum_j a_ij c_j = c_i^2 / 2.
  const Vector ac = radau.A * radau.c;
  CHECK(std::abs(ac[0] - radau.c[0] * radau.c[0] / 2.0) <= 1e-15);
  CHECK(std::abs(ac[1] - 0.5) <= 1e-15);

  const auto lob = tableau_lookup(TableauFamily::LobattoIIIC, 2);
  CHECK(lob.A(0, 0) == 0.5);
  CHECK(lob.A(0, 1) == -0.5);
  CHECK(lob.A(1, 0) == 0.5);
  CHECK(lob.A(1, 1) == 0.5);
  CHECK(lob.c[0] == 0.0);
  CHECK(lob.order == 2);

  const auto pr = tableau_lookup(TableauFamily::PareschiRusso, 2);
  const double x = 1.0 - std::sqrt(2.0) / 2.0;
  CHECK(pr.A(0, 0) == doctest::Approx(x).epsilon(1e-15));
  CHECK(pr.A(0, 1) == 0.0);

  CHECK_THROWS_AS(tableau_lookup(TableauFamily::Gauss, 4), InvalidParameter);
  CHECK_THROWS_AS(tableau_lookup(TableauFamily::Alexander, 2), InvalidParameter);
  CHECK_THROWS_AS(tableau_lookup(TableauFamily::BackwardEuler, 2), InvalidParameter);
  CHECK(parse_family("RadauIIA") == TableauFamily::RadauIIA);
  CHECK(parse_family("dirk-pareschi-russo") == TableauFamily::PareschiRusso);
  CHECK_THROWS_AS(parse_family("heun"), InvalidParameter);
}

TEST_CASE("registry consistency and declared orders")
{
  const auto reg = tableau_registry();
  CHECK(reg.size() == 9);
  for (const auto &t : reg)
  {
    CAPTURE(t.name);
    const auto rep = consistency_check(t);
    CHECK(rep.passed);
    CHECK(std::abs(rep.sum_b - 1.0) <= 1e-14);
    for (double d : rep.row_sum_defects)
    {
      CHECK(d <= 1e-14);
    }
    CHECK(rep.quadrature_order == t.order);
    CHECK(rep.stage_order == t.stage_order);
    CHECK(std::abs(stability_function(t, 0.0) - 1.0) <= 1e-15);
    const double rinf = std::abs(stability_function(t, -1e6));
    if (t.family == TableauFamily::Gauss)
    {
      CHECK(rinf >= 0.99);
    }
    else
    {
      CHECK(rinf <= 1e-4);
    }
    CHECK(t.l_stable == (rinf <= 1e-4));
  }
  CHECK(consistency_check(tableau_lookup(TableauFamily::RadauIIA, 3)).quadrature_order == 5);
  CHECK(consistency_check(tableau_lookup(TableauFamily::Gauss, 2)).quadrature_order == 4);
  CHECK(tableau_lookup(TableauFamily::RadauIIA, 2).stiffly_accurate());
  CHECK(tableau_lookup(TableauFamily::LobattoIIIC, 3).stiffly_accurate());
  CHECK_FALSE(tableau_lookup(TableauFamily::Gauss, 2).stiffly_accurate());
}

TEST_CASE("tampered tableau fails the check")
{
  auto t = tableau_lookup(TableauFamily::Gauss, 2);
  t.b << 1.0, 1.0;
  const auto rep = consistency_check(t);
  CHECK_FALSE(rep.passed);
  CHECK(rep.sum_b == doctest::Approx(2.0));
}

TEST_CASE("stability functions match closed forms")
{
  // Closed forms from tests/oracles/stability_functions.py.
  const auto radau = tableau_lookup(TableauFamily::RadauIIA, 2);
  const auto lob = tableau_lookup(TableauFamily::LobattoIIIC, 2);
  const auto gauss = tableau_lookup(TableauFamily::Gauss, 2);
  const auto be = tableau_lookup(TableauFamily::BackwardEuler, 1);
  CHECK(std::abs(stability_function(be, -1.0) - 0.5) <= 1e-15);
  for (const std::complex<double> z : {std::complex<double>(-0.7, 0.0),
                                       std::complex<double>(-3.0, 2.0),
                                       std::complex<double>(0.25, -1.5)})
  {
    const auto rr = (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
    const auto rl = 1.0 / (1.0 - z + z * z / 2.0);
    const auto rg = (1.0 + z / 2.0 + z * z / 12.0) / (1.0 - z / 2.0 + z * z / 12.0);
    CHECK(std::abs(stability_function(radau, z) - rr) <= 1e-14);
    CHECK(std::abs(stability_function(lob, z) - rl) <= 1e-14);
    CHECK(std::abs(stability_function(gauss, z) - rg) <= 1e-14);
  }
  // Pole of backward Euler at z = 1.
  CHECK_THROWS_AS(stability_function(be, 1.0), InvalidParameter);
}

TEST_CASE("Dahlquist convergence orders")
{
  const double lambda = -2.0;
  for (const auto &t : tableau_registry())
  {
    CAPTURE(t.name);
    std::vector<double> err;
    for (int n : {8, 16, 32})
    {
      const double dt = 1.0 / n;
      const std::complex<double> r = stability_function(t, lambda * dt);
      err.push_back(std::abs(std::pow(r.real(), n) - std::exp(lambda)));
    }
    if (err[2] < 1e-11)
    {
      // Sixth order reaches roundoff before the finest step; compare the coarser pair.
      CHECK(std::log2(err[0] / err[1]) >= t.order - 0.2);
      continue;
    }
    const double observed = std::log2(err[1] / err[2]);
    CHECK(std::abs(observed - t.order) <= 0.2);
  }
}

TEST_CASE("tableau report text")
{
  const std::string rep = tableau_report(tableau_lookup(TableauFamily::RadauIIA, 2));
  CHECK(rep.find("RadauIIA(2)") != std::string::npos);
  CHECK(rep.find("sum_b: 1") != std::string::npos);
  CHECK(rep.find("abs_r_at_-1e6") != std::string::npos);
  CHECK(default_stages(TableauFamily::BackwardEuler) == 1);
  CHECK(default_stages(TableauFamily::Alexander) == 3);
}

TEST_CASE("stage operator equals the Kronecker oracle")
{
  const Mesh2D m = build_crossed_grid(1);
  const auto bl = blocks_on(m);
  const DofMap vel(m, SpaceKind::P2Vec);
  for (const auto &t :
       {tableau_lookup(TableauFamily::RadauIIA, 2), tableau_lookup(TableauFamily::Gauss, 3)})
  {
    CAPTURE(t.name);
    const double dt = 0.13;
    const StageOperator op(bl, t, dt, vel.boundary_dofs());
    const Eigen::MatrixXd oracle = kronecker_oracle(*bl, t.A, dt);
    const Eigen::MatrixXd raw = Eigen::MatrixXd(op.materialize(false));
    CHECK((raw - oracle).cwiseAbs().maxCoeff() <= 1e-13);

    // Dirichlet form: constrained rows and columns replaced by the identity.
    Eigen::MatrixXd expect = oracle;
    for (int idx : op.constrained_indices())
    {
      expect.row(idx).setZero();
      expect.col(idx).setZero();
      expect(idx, idx) = 1.0;
    }
    const Eigen::MatrixXd elim = Eigen::MatrixXd(op.materialize(true));
    CHECK((elim - expect).cwiseAbs().maxCoeff() <= 1e-13);

    // Matrix-free products agree with the materialized forms; linearity.
    const Vector v = random_vector(op.size(), 3), w = random_vector(op.size(), 4);
    CHECK((op.apply(v) - elim * v).cwiseAbs().maxCoeff() <= 1e-13);
    Vector y;
    op.apply_raw(v, y);
    CHECK((y - raw * v).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((op.apply(2.5 * v + w) - 2.5 * op.apply(v) - op.apply(w)).cwiseAbs().maxCoeff() <=
          1e-12);
  }
}

TEST_CASE("special stage operators")
{
  const Mesh2D m = build_crossed_grid(1);
  const auto bl = blocks_on(m);
  const int nu = bl->n_u, np = bl->n_p;
  const double dt = 0.2;
  const StageOperator be(bl, tableau_lookup(TableauFamily::BackwardEuler, 1), dt);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(nu + np, nu + np);
  expect.topLeftCorner(nu, nu) = Eigen::MatrixXd(bl->M) + dt * Eigen::MatrixXd(bl->K);
  expect.topRightCorner(nu, np) = dt * Eigen::MatrixXd(bl->B);
  expect.bottomLeftCorner(np, nu) = dt * Eigen::MatrixXd(bl->B).transpose();
  CHECK((Eigen::MatrixXd(be.materialize()) - expect).cwiseAbs().maxCoeff() <= 1e-14);

  const StageOperator zero_dt(bl, tableau_lookup(TableauFamily::RadauIIA, 2), 0.0);
  const Vector v = random_vector(zero_dt.size(), 9);
  const Vector y = zero_dt.apply(v);
  for (int s = 0; s < 2; s++)
  {
    CHECK(y.segment(zero_dt.pressure_offset(s), np).cwiseAbs().maxCoeff() == 0.0);
    CHECK((y.segment(zero_dt.velocity_offset(s), nu) -
           bl->M * v.segment(zero_dt.velocity_offset(s), nu))
              .cwiseAbs()
              .maxCoeff() <= 1e-15);
  }
  CHECK_THROWS_AS(StageOperator(bl, tableau_lookup(TableauFamily::RadauIIA, 2), -1.0),
                  InvalidParameter);
  const Mesh2D big = build_crossed_grid(32);
  const auto bbig = blocks_on(big);
  CHECK_THROWS_AS(StageOperator(bbig, tableau_lookup(TableauFamily::RadauIIA, 2), 0.1)
                      .materialize(),
                  InvalidParameter);
}

TEST_CASE("stage right-hand side")
{
  const Mesh2D m = build_crossed_grid(2);
  const auto bl = blocks_on(m);
  const DofMap vel(m, SpaceKind::P2Vec);
  const auto t = tableau_lookup(TableauFamily::RadauIIA, 2);
  const StageOperator op(bl, t, 0.1, vel.boundary_dofs());

  StepState s;
  s.dt = 0.1;
  s.u = Vector::Zero(bl->n_u);
  s.p = Vector::Zero(bl->n_p);
  CHECK(assemble_stage_rhs(op, s, {}, {}).cwiseAbs().maxCoeff() == 0.0);

  s.u = interpolate(vel, VectorField([](double, double y) { return std::array<double, 2>{y, 0.0}; }));
  const Vector rhs = assemble_stage_rhs(op, s, {}, {});
  for (int st = 0; st < 2; st++)
  {
    CHECK(rhs.segment(op.pressure_offset(st), bl->n_p).cwiseAbs().maxCoeff() <= 1e-13);
  }
  // Constrained rows carry the boundary data after lifting.
  std::vector<Vector> bc(2, Vector::Constant(static_cast<Eigen::Index>(vel.boundary_dofs().size()), 0.7));
  const Vector lifted = assemble_stage_rhs(op, s, {}, bc);
  for (int idx : op.constrained_indices())
  {
    CHECK(lifted[idx] == 0.7);
  }
}

TEST_CASE("step advance")
{
  const auto radau = tableau_lookup(TableauFamily::RadauIIA, 2);
  StepState s;
  s.t = 0.3;
  s.dt = 0.05;
  s.u = Vector::LinSpaced(6, 1.0, 2.0);
  s.p = Vector::LinSpaced(3, -1.0, 1.0);
  const StepState same = advance_step(s, radau, Vector::Zero(18));
  CHECK((same.u - s.u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((same.p - s.p).cwiseAbs().maxCoeff() == 0.0);
  CHECK(same.t == doctest::Approx(0.35));

  // Stiffly accurate schemes: u^{n+1} equals the last stage value.
  for (const auto &t : {radau, tableau_lookup(TableauFamily::LobattoIIIC, 2),
                        tableau_lookup(TableauFamily::LobattoIIIC, 3),
                        tableau_lookup(TableauFamily::RadauIIA, 3)})
  {
    const Vector k = random_vector(t.stages() * 9, 5);
    const StepState next = advance_step(s, t, k);
    const auto U = stage_velocities(t, s.dt, s.u, k, 6, 3);
    CHECK((next.u - U.back()).cwiseAbs().maxCoeff() <= 1e-14);
  }

  // Scalar surrogate u' = -u with backward Euler.
  auto scalar = std::make_shared<BlockSystem>();
  scalar->n_u = 1;
  scalar->n_p = 0;
  scalar->M.resize(1, 1);
  scalar->M.insert(0, 0) = 1.0;
  scalar->K = scalar->M;
  scalar->B.resize(1, 0);
  const auto be = tableau_lookup(TableauFamily::BackwardEuler, 1);
  const double dt = 0.25;
  const StageOperator op(scalar, be, dt);
  StepState st;
  st.dt = dt;
  st.u = Vector::Constant(1, 2.0);
  st.p = Vector::Zero(0);
  const Vector rhs = assemble_stage_rhs(op, st, {}, {});
  const Vector k = rhs / (1.0 + dt);
  CHECK((op.apply(k) - rhs).norm() <= 1e-15);
  CHECK(advance_step(st, be, k).u[0] == doctest::Approx(2.0 / (1.0 + dt)).epsilon(1e-15));
}

TEST_CASE("stage boundary data conventions")
{
  const Mesh2D m = build_crossed_grid(2);
  const DofMap vel(m, SpaceKind::P2Vec);
  DirichletSpec bc;
  bc.constrained = vel.boundary_dofs();
  bc.g = [](double x, double y, double t) { return std::array<double, 2>{x * t * t, y + t}; };
  bc.g_t = [](double x, double, double t) { return std::array<double, 2>{2.0 * x * t, 1.0}; };
  const Vector un = interpolate(vel, VectorField([](double x, double y) {
                                  return std::array<double, 2>{0.1 * x, y};
                                }));
  const auto t = tableau_lookup(TableauFamily::RadauIIA, 2);
  const double t0 = 0.4, dt = 0.1;

  const auto der = stage_boundary_data(t, dt, t0, bc, vel, un, StageBC::Derivative);
  CHECK((der[1] - bc.values(vel, t0 + dt, true)).cwiseAbs().maxCoeff() == 0.0);

  // Stage values reproduce g at the stage times on the boundary.
  const auto sv = stage_boundary_data(t, dt, t0, bc, vel, un, StageBC::StageValue);
  for (int i = 0; i < 2; i++)
  {
    const Vector g = bc.values(vel, t0 + t.c[i] * dt, false);
    for (std::size_t j = 0; j < bc.constrained.size(); j++)
    {
      double Ui = un[bc.constrained[j]];
      for (int l = 0; l < 2; l++)
      {
        Ui += dt * t.A(i, l) * sv[l][static_cast<Eigen::Index>(j)];
      }
      CHECK(std::abs(Ui - g[static_cast<Eigen::Index>(j)]) <= 1e-13);
    }
  }
  CHECK(parse_stage_bc("derivative") == StageBC::Derivative);
  CHECK_THROWS_AS(parse_stage_bc("values"), InvalidParameter);
}

namespace
{

std::array<double, 2> exact_u(double x, double y, double t)
{
  const double pi = std::acos(-1.0);
  const double e = std::exp(-2.0 * pi * pi * t);
  return {std::sin(pi * x) * std::cos(pi * y) * e, -std::cos(pi * x) * std::sin(pi * y) * e};
}

std::array<double, 2> exact_u_t(double x, double y, double t)
{
  const double pi = std::acos(-1.0);
  const auto u = exact_u(x, y, t);
  return {-2.0 * pi * pi * u[0], -2.0 * pi * pi * u[1]};
}

// Absolute L2 velocity error after one MMS Stokes step from the interpolated exact state.
double one_step_error(const TaylorHoodHierarchy &h, const ButcherTableau &t, double dt)
{
  const auto &fine = h.finest();
  const StageOperator op(fine.blocks, t, dt, fine.velocity_constrained);
  const Eigen::SparseMatrix<double> A = op.materialize(true, 20000);
  StepState s;
  s.dt = dt;
  s.u = interpolate(fine.velocity, VectorField([](double x, double y) {
                      return exact_u(x, y, 0.0);
                    }));
  s.p = Vector::Zero(fine.pressure.num_dofs());
  DirichletSpec bc;
  bc.constrained = fine.velocity_constrained;
  bc.g = exact_u;
  bc.g_t = exact_u_t;
  const auto g = stage_boundary_data(t, dt, 0.0, bc, fine.velocity, s.u, StageBC::StageValue);
  const Vector rhs = assemble_stage_rhs(op, s, {}, g);
  // Pin one pressure per stage to remove the constant nullspace.
  Eigen::SparseMatrix<double> Ap = A;
  Vector b = rhs;
  for (int st = 0; st < t.stages(); st++)
  {
    const int row = op.pressure_offset(st);
    Ap.prune([row](Eigen::Index i, Eigen::Index j, double) { return i != row && j != row; });
    Ap.coeffRef(row, row) = 1.0;
    b[row] = 0.0;
  }
  Ap.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(Ap);
  const Vector k = lu.solve(b);
  const StepState next = advance_step(s, t, k, &fine.pressure_integrals);
  return l2_error(*fine.mesh, fine.velocity, next.u,
                  VectorField([dt](double x, double y) { return exact_u(x, y, dt); }),
                  ErrorMode::Absolute);
}

}  // namespace

TEST_CASE("single-step error order")
{
  // One step from the exact state has local error O(dt^{q+1}), q the stage order, until the
  // spatial error takes over; the best halving ratio must show that order.
  const TaylorHoodHierarchy h(8, 1);
  for (const auto &t : {tableau_lookup(TableauFamily::RadauIIA, 2),
                        tableau_lookup(TableauFamily::LobattoIIIC, 2)})
  {
    CAPTURE(t.name);
    std::vector<double> err;
    for (double dt : {1.0 / 32, 1.0 / 64, 1.0 / 128})
    {
      err.push_back(one_step_error(h, t, dt));
    }
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < err.size(); i++)
    {
      CHECK(err[i + 1] < err[i]);
      best = std::max(best, std::log2(err[i] / err[i + 1]));
    }
    CHECK(best >= t.stage_order + 1 - 0.3);
  }
}
