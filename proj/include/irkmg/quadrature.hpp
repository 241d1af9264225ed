#pragma once

#include <vector>

namespace irkmg
{

struct QuadraturePoint
{
  double xi;
  double eta;
  double weight;
};

/// Rule on the reference triangle {(xi,eta): xi,eta >= 0, xi+eta <= 1}, exact for
/// polynomials of total degree <= degree. Weights sum to 1/2.
///
/// Built as a collapsed (Duffy) tensor product of Gauss-Legendre rules.
const std::vector<QuadraturePoint> &triangle_rule(int degree);

/// Gauss-Legendre nodes and weights on [0,1].
void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights);

}  // namespace irkmg
