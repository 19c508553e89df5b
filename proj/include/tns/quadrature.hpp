// Quadrature rules on the reference tetrahedron and on intervals.
#pragma once

#include <array>
#include <vector>

namespace tns {

/// Points in barycentric coordinates; weights sum to 1 so that a physical
/// integral is volume * sum(w_q f(x_q)).
struct TetRule {
    std::vector<std::array<double, 4>> bary;
    std::vector<double> weights;
    int degree = 0;
    [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Collapsed (Stroud conical product) Gauss-Jacobi rule with q points per
/// direction, exact for polynomials of total degree 2q - 1.
[[nodiscard]] TetRule conical_tet_rule(int q);

/// Rule used by every assembly and form evaluation in the library.
/// Degree 11 covers the cubic-times-quartic-times-quartic integrands of the
/// MINI convective forms.
[[nodiscard]] const TetRule& default_tet_rule();

struct LineRule {
    std::vector<double> points;   // in [0, 1]
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Jacobi nodes and weights on [-1, 1] for weight (1-t)^alpha (1+t)^beta.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights);

/// n-point Gauss-Legendre rule on [0, 1].
[[nodiscard]] LineRule gauss_legendre_unit(int n);

}  // namespace tns
