// Monolithic direct solves of the zero-mean constrained saddle-point systems
//
//   [ F     -B^T   C^T   0    -1/2 B^T ] [ u   ]   [ f ]
//   [ B      0     0     m     0       ] [ p   ]   [ g ]
//   [ C      0     0     0     0       ] [ l_u ] = [ c ]
//   [ 0      m^T   0     0     0       ] [ l_p ]   [ 0 ]
//   [ -G     0     0     0     Mp      ] [ k   ]   [ 0 ]
//
// where C holds the velocity mean rows, m the pressure basis integrals, and the
// last block row/column is present only with the projected Bernoulli term.
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/SparseLU>

#include "tns/forms.hpp"

namespace tns {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SaddleSolution {
    Vector velocity;
    Vector pressure;
    double residual = 0.0;       // ||K x - b||_2 / max(||b||_2, tiny)
    int refinement_steps = 0;
};

/// Factorizes one saddle operator and solves it for any number of right-hand
/// sides. Iterative refinement is applied until the relative residual drops
/// below residual_tol (or a few sweeps have been spent).
class SaddleSolver {
public:
    SaddleSolver(const FESpaces& spaces, const AssembledOperators& ops);

    /// F is velocity_dim x velocity_dim. bernoulli, when given, is G(a).
    void factorize(const SpMat& F, const SpMat* bernoulli = nullptr);
    [[nodiscard]] bool factorized() const { return factorized_; }

    /// f: momentum right-hand side; g: divergence right-hand side (pressure
    /// test functions); mean: prescribed velocity mean times volume per component.
    [[nodiscard]] SaddleSolution solve(const Vector& f, const Vector& g,
                                       const Vec3& mean = Vec3::Zero()) const;

    [[nodiscard]] int system_size() const { return static_cast<int>(system_.rows()); }
    [[nodiscard]] const SpMat& system_matrix() const { return system_; }

    double residual_tol = 1e-13;
    int max_refinement = 3;

private:
    const FESpaces* spaces_;
    const AssembledOperators* ops_;
    SpMat system_;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    bool factorized_ = false;
    bool with_bernoulli_ = false;
};

/// L2 projection onto the discretely divergence-free zero-mean subspace V_h.
[[nodiscard]] Vector project_divergence_free(const FESpaces& spaces, const AssembledOperators& ops,
                                             const Vector& u);

}  // namespace tns
