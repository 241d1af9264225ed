#include "irkmg/tableau.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "irkmg/error.hpp"

namespace irkmg
{

bool ButcherTableau::stiffly_accurate(double tol) const
{
  const int r = stages();
  return (A.row(r - 1).transpose() - b).cwiseAbs().maxCoeff() <= tol;
}

TableauFamily parse_family(const std::string &name)
{
  std::string key;
  for (char ch : name)
  {
    if (std::isalnum(static_cast<unsigned char>(ch)))
    {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (key == "gauss" || key == "gausslegendre")
    return TableauFamily::Gauss;
  if (key == "radauiia" || key == "radau")
    return TableauFamily::RadauIIA;
  if (key == "lobattoiiic" || key == "lobatto")
    return TableauFamily::LobattoIIIC;
  if (key == "pareschirusso" || key == "dirkpareschirusso" || key == "dirk2")
    return TableauFamily::PareschiRusso;
  if (key == "alexander" || key == "dirkalexander" || key == "dirk3")
    return TableauFamily::Alexander;
  if (key == "backwardeuler" || key == "be")
    return TableauFamily::BackwardEuler;
  throw InvalidParameter("unknown tableau family '" + name + "'");
}

std::string family_name(TableauFamily family)
{
  switch (family)
  {
    case TableauFamily::Gauss:
      return "Gauss";
    case TableauFamily::RadauIIA:
      return "RadauIIA";
    case TableauFamily::LobattoIIIC:
      return "LobattoIIIC";
    case TableauFamily::PareschiRusso:
      return "DIRK-PareschiRusso";
    case TableauFamily::Alexander:
      return "DIRK-Alexander";
    case TableauFamily::BackwardEuler:
      return "BackwardEuler";
  }
  return "unknown";
}

ButcherTableau tableau_lookup(TableauFamily family, int stages)
{
  ButcherTableau t;
  t.family = family;
  t.name = family_name(family) + "(" + std::to_string(stages) + ")";
  const auto unsupported = [&]() {
    return InvalidParameter("unsupported tableau " + t.name);
  };
  const double s3 = std::sqrt(3.0);
  const double s6 = std::sqrt(6.0);
  const double s15 = std::sqrt(15.0);

  switch (family)
  {
    case TableauFamily::BackwardEuler:
      if (stages != 1)
        throw unsupported();
      t.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
      t.b = Eigen::VectorXd::Constant(1, 1.0);
      t.c = Eigen::VectorXd::Constant(1, 1.0);
      t.order = 1;
      t.stage_order = 1;
      t.l_stable = true;
      break;

    case TableauFamily::Gauss:
      if (stages == 2)
      {
        t.A.resize(2, 2);
        t.A << 0.25, 0.25 - s3 / 6.0, 0.25 + s3 / 6.0, 0.25;
        t.b.resize(2);
        t.b << 0.5, 0.5;
        t.c.resize(2);
        t.c << 0.5 - s3 / 6.0, 0.5 + s3 / 6.0;
        t.order = 4;
        t.stage_order = 2;
      }
      else if (stages == 3)
      {
        t.A.resize(3, 3);
        t.A << 5.0 / 36.0, 2.0 / 9.0 - s15 / 15.0, 5.0 / 36.0 - s15 / 30.0,  //
            5.0 / 36.0 + s15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s15 / 24.0,      //
            5.0 / 36.0 + s15 / 30.0, 2.0 / 9.0 + s15 / 15.0, 5.0 / 36.0;
        t.b.resize(3);
        t.b << 5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0;
        t.c.resize(3);
        t.c << 0.5 - s15 / 10.0, 0.5, 0.5 + s15 / 10.0;
        t.order = 6;
        t.stage_order = 3;
      }
      else
      {
        throw unsupported();
      }
      t.l_stable = false;
      break;

    case TableauFamily::RadauIIA:
      if (stages == 2)
      {
        t.A.resize(2, 2);
        t.A << 5.0 / 12.0, -1.0 / 12.0, 3.0 / 4.0, 1.0 / 4.0;
        t.b.resize(2);
        t.b << 3.0 / 4.0, 1.0 / 4.0;
        t.c.resize(2);
        t.c << 1.0 / 3.0, 1.0;
        t.order = 3;
        t.stage_order = 2;
      }
      else if (stages == 3)
      {
        t.A.resize(3, 3);
        t.A << (88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0,
            (-2.0 + 3.0 * s6) / 225.0,  //
            (296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0,
            (-2.0 - 3.0 * s6) / 225.0,  //
            (16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0;
        t.b = t.A.row(2).transpose();
        t.c.resize(3);
        t.c << (4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0;
        t.order = 5;
        t.stage_order = 3;
      }
      else
      {
        throw unsupported();
      }
      t.l_stable = true;
      break;

    case TableauFamily::LobattoIIIC:
      if (stages == 2)
      {
        t.A.resize(2, 2);
        t.A << 0.5, -0.5, 0.5, 0.5;
        t.b.resize(2);
        t.b << 0.5, 0.5;
        t.c.resize(2);
        t.c << 0.0, 1.0;
        t.order = 2;
        t.stage_order = 1;
      }
      else if (stages == 3)
      {
        t.A.resize(3, 3);
        t.A << 1.0 / 6.0, -1.0 / 3.0, 1.0 / 6.0,  //
            1.0 / 6.0, 5.0 / 12.0, -1.0 / 12.0,   //
            1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
        t.b.resize(3);
        t.b << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
        t.c.resize(3);
        t.c << 0.0, 0.5, 1.0;
        t.order = 4;
        t.stage_order = 2;
      }
      else
      {
        throw unsupported();
      }
      t.l_stable = true;
      break;

    case TableauFamily::PareschiRusso:
    {
      if (stages != 2)
        throw unsupported();
      const double x = 1.0 - std::sqrt(2.0) / 2.0;
      t.A.resize(2, 2);
      t.A << x, 0.0, 1.0 - 2.0 * x, x;
      t.b.resize(2);
      t.b << 0.5, 0.5;
      t.c.resize(2);
      t.c << x, 1.0 - x;
      t.order = 2;
      t.stage_order = 1;
      t.l_stable = true;
      break;
    }

    case TableauFamily::Alexander:
    {
      if (stages != 3)
        throw unsupported();
      // alpha is the root of x^3 - 3x^2 + 3x/2 - 1/6 in (1/6, 1/2).
      double a = 0.4358665215;
      for (int it = 0; it < 50; it++)
      {
        const double f = ((a - 3.0) * a + 1.5) * a - 1.0 / 6.0;
        const double df = (3.0 * a - 6.0) * a + 1.5;
        a -= f / df;
      }
      const double tau = 0.5 * (1.0 + a);
      const double b1 = -(6.0 * a * a - 16.0 * a + 1.0) / 4.0;
      const double b2 = (6.0 * a * a - 20.0 * a + 5.0) / 4.0;
      t.A.resize(3, 3);
      t.A << a, 0.0, 0.0, tau - a, a, 0.0, b1, b2, a;
      t.b.resize(3);
      t.b << b1, b2, a;
      t.c.resize(3);
      t.c << a, tau, 1.0;
      t.order = 3;
      t.stage_order = 1;
      t.l_stable = true;
      break;
    }
  }
  return t;
}

std::vector<ButcherTableau> tableau_registry()
{
  return {tableau_lookup(TableauFamily::BackwardEuler, 1),
          tableau_lookup(TableauFamily::Gauss, 2),
          tableau_lookup(TableauFamily::Gauss, 3),
          tableau_lookup(TableauFamily::RadauIIA, 2),
          tableau_lookup(TableauFamily::RadauIIA, 3),
          tableau_lookup(TableauFamily::LobattoIIIC, 2),
          tableau_lookup(TableauFamily::LobattoIIIC, 3),
          tableau_lookup(TableauFamily::PareschiRusso, 2),
          tableau_lookup(TableauFamily::Alexander, 3)};
}

ConsistencyReport consistency_check(const ButcherTableau &t, double tol)
{
  ConsistencyReport rep;
  const int r = t.stages();
  std::ostringstream msg;
  bool ok = t.A.rows() == r && t.A.cols() == r && t.c.size() == r;
  if (!ok)
  {
    rep.message = "tableau arrays have inconsistent sizes";
    return rep;
  }

  rep.sum_b = t.b.sum();
  if (std::abs(rep.sum_b - 1.0) > tol)
  {
    ok = false;
    msg << "sum(b) = " << rep.sum_b << " != 1; ";
  }
  for (int i = 0; i < r; i++)
  {
    const double d = std::abs(t.A.row(i).sum() - t.c[i]);
    rep.row_sum_defects.push_back(d);
    if (d > tol)
    {
      ok = false;
      msg << "row " << i << " sums to " << t.A.row(i).sum() << " != c = " << t.c[i] << "; ";
    }
  }

  const auto quad_defect = [&](int k) {
    double s = 0.0;
    for (int j = 0; j < r; j++)
    {
      s += t.b[j] * std::pow(t.c[j], k - 1);
    }
    return std::abs(s - 1.0 / k);
  };
  for (int k = 1; k <= t.order; k++)
  {
    const double d = quad_defect(k);
    rep.quadrature_defects.push_back(d);
    if (d > 1e-12)
    {
      ok = false;
      msg << "quadrature condition B(" << k << ") violated by " << d << "; ";
    }
  }
  rep.quadrature_order = 0;
  while (rep.quadrature_order < 4 * r + 2 && quad_defect(rep.quadrature_order + 1) <= 1e-12)
  {
    rep.quadrature_order++;
  }

  rep.stage_order = 0;
  for (int q = 1; q <= r + 1; q++)
  {
    bool holds = true;
    for (int i = 0; i < r && holds; i++)
    {
      double s = 0.0;
      for (int j = 0; j < r; j++)
      {
        s += t.A(i, j) * std::pow(t.c[j], q - 1);
      }
      holds = std::abs(s - std::pow(t.c[i], q) / q) <= 1e-12;
    }
    if (!holds)
    {
      break;
    }
    rep.stage_order = q;
  }

  rep.passed = ok;
  rep.message = ok ? "ok" : msg.str();
  return rep;
}

std::complex<double> stability_function(const ButcherTableau &t, std::complex<double> z)
{
  const int r = t.stages();
  using CMatrix = Eigen::MatrixXcd;
  using CVector = Eigen::VectorXcd;
  CMatrix S = CMatrix::Identity(r, r) - z * t.A.cast<std::complex<double>>();
  Eigen::FullPivLU<CMatrix> lu(S);
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  lu.setThreshold(1e-13);
  if (lu.rank() < r || std::abs(lu.determinant()) <= 1e-13 * std::pow(scale, r))
  {
    throw InvalidParameter("stability_function: I - zA is singular at this z");
  }
  const CVector y = lu.solve(CVector::Ones(r));
  return 1.0 + z * (t.b.cast<std::complex<double>>().dot(y));
}

std::string tableau_report(const ButcherTableau &t)
{
  const auto rep = consistency_check(t);
  std::ostringstream os;
  os << std::setprecision(6);
  os << "name: " << t.name << '\n';
  os << "stages: " << t.stages() << '\n';
  os << "order: " << t.order << '\n';
  os << "stage_order: " << t.stage_order << '\n';
  os << "sum_b: " << std::setprecision(17) << rep.sum_b << std::setprecision(6) << '\n';
  os << "row_sum_defects:";
  for (double d : rep.row_sum_defects)
  {
    os << ' ' << d;
  }
  os << '\n';
  os << "abs_r_at_-1e6: " << std::abs(stability_function(t, {-1e6, 0.0})) << '\n';
  os << "l_stable: " << (t.l_stable ? "yes" : "no") << '\n';
  os << "consistency: " << rep.message << '\n';
  return os.str();
}

int default_stages(TableauFamily family)
{
  switch (family)
  {
    case TableauFamily::BackwardEuler:
      return 1;
    case TableauFamily::Alexander:
      return 3;
    default:
      return 2;
  }
}

}  // namespace irkmg
