#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irkmg
{

enum class TableauFamily
{
  Gauss,
  RadauIIA,
  LobattoIIIC,
  PareschiRusso,
  Alexander,
  BackwardEuler
};

struct ButcherTableau
{
  std::string name;
  TableauFamily family;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  int order = 0;
  int stage_order = 0;
  bool l_stable = false;

  int stages() const { return static_cast<int>(b.size()); }
  /// b equals the last row of A.
  bool stiffly_accurate(double tol = 1e-14) const;
};

/// Parses "gauss", "radauiia", "lobattoiiic", "pareschi-russo"/"dirk-pareschirusso",
/// "alexander"/"dirk-alexander", "backward-euler" (case-insensitive).
TableauFamily parse_family(const std::string &name);
std::string family_name(TableauFamily family);

/// Throws InvalidParameter for unsupported (family, stages) pairs.
ButcherTableau tableau_lookup(TableauFamily family, int stages);

/// Stage count used when none is given: 1 for backward Euler, 3 for Alexander, else 2.
int default_stages(TableauFamily family);

/// Every registered (family, stages) pair.
std::vector<ButcherTableau> tableau_registry();

struct ConsistencyReport
{
  bool passed = false;
  double sum_b = 0.0;
  /// |sum_j a_ij - c_i| per row.
  std::vector<double> row_sum_defects;
  /// |sum_j b_j c_j^{k-1} - 1/k| for k = 1..order.
  std::vector<double> quadrature_defects;
  /// Largest k with the k-th quadrature condition holding to 1e-12.
  int quadrature_order = 0;
  /// Largest q with sum_j a_ij c_j^{k-1} = c_i^k / k for all k <= q.
  int stage_order = 0;
  std::string message;
};

ConsistencyReport consistency_check(const ButcherTableau &tableau, double tol = 1e-14);

/// r(z) = 1 + z b^T (I - zA)^{-1} 1. Throws InvalidParameter when z is (near) a pole.
std::complex<double> stability_function(const ButcherTableau &tableau, std::complex<double> z);

/// Multi-line human-readable summary used by the CLI.
std::string tableau_report(const ButcherTableau &tableau);

}  // namespace irkmg
