#include "tns/linsolve.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace tns {

SaddleSolver::SaddleSolver(const FESpaces& spaces, const AssembledOperators& ops)
    : spaces_(&spaces), ops_(&ops) {}

void SaddleSolver::factorize(const SpMat& F, const SpMat* bernoulli) {
    const int nv = spaces_->velocity_dim();
    const int np = spaces_->pressure_dim();
    if (F.rows() != nv || F.cols() != nv) throw std::invalid_argument("SaddleSolver: F has wrong shape");
    with_bernoulli_ = bernoulli != nullptr;
    const int off_p = nv, off_lu = nv + np, off_lp = nv + np + 3, off_k = nv + np + 4;
    const int n = off_k + (with_bernoulli_ ? np : 0);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(F.nonZeros() + 4 * ops_->divergence.nonZeros() + 8 * nv);
    for (int k = 0; k < F.outerSize(); ++k)
        for (SpMat::InnerIterator it(F, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    const SpMat& B = ops_->divergence;
    for (int k = 0; k < B.outerSize(); ++k)
        for (SpMat::InnerIterator it(B, k); it; ++it) {
            trip.emplace_back(it.col(), off_p + it.row(), -it.value());
            trip.emplace_back(off_p + it.row(), it.col(), it.value());
            if (with_bernoulli_) trip.emplace_back(it.col(), off_k + it.row(), -0.5 * it.value());
        }
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < nv; ++j) {
            const double v = ops_->velocity_mean_rows(c, j);
            if (v == 0.0) continue;
            trip.emplace_back(j, off_lu + c, v);
            trip.emplace_back(off_lu + c, j, v);
        }
    for (int i = 0; i < np; ++i) {
        trip.emplace_back(off_p + i, off_lp, ops_->pressure_mean_row[i]);
        trip.emplace_back(off_lp, off_p + i, ops_->pressure_mean_row[i]);
    }
    if (with_bernoulli_) {
        const SpMat& G = *bernoulli;
        for (int k = 0; k < G.outerSize(); ++k)
            for (SpMat::InnerIterator it(G, k); it; ++it) trip.emplace_back(off_k + it.row(), it.col(), -it.value());
        const SpMat& Mp = spaces_->pressure_mass();
        for (int k = 0; k < Mp.outerSize(); ++k)
            for (SpMat::InnerIterator it(Mp, k); it; ++it) trip.emplace_back(off_k + it.row(), off_k + it.col(), it.value());
    }
    system_.resize(n, n);
    system_.setFromTriplets(trip.begin(), trip.end());
    system_.makeCompressed();

    lu_.analyzePattern(system_);
    lu_.factorize(system_);
    if (lu_.info() != Eigen::Success)
        throw SolverError("SaddleSolver: factorization failed: " + lu_.lastErrorMessage());
    factorized_ = true;
}

SaddleSolution SaddleSolver::solve(const Vector& f, const Vector& g, const Vec3& mean) const {
    if (!factorized_) throw SolverError("SaddleSolver: solve called before factorize");
    const int nv = spaces_->velocity_dim();
    const int np = spaces_->pressure_dim();
    Vector rhs = Vector::Zero(system_.rows());
    rhs.head(nv) = f;
    rhs.segment(nv, np) = g;
    rhs.segment(nv + np, 3) = mean;

    Vector x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) throw SolverError("SaddleSolver: back-substitution failed");
    const double bnorm = std::max(rhs.norm(), std::numeric_limits<double>::min());
    SaddleSolution out;
    Vector r = rhs - system_ * x;
    out.residual = r.norm() / bnorm;
    while (out.residual > residual_tol && out.refinement_steps < max_refinement) {
        x += lu_.solve(r);
        r = rhs - system_ * x;
        out.residual = r.norm() / bnorm;
        ++out.refinement_steps;
    }
    if (!std::isfinite(out.residual)) throw SolverError("SaddleSolver: non-finite solution");
    out.velocity = x.head(nv);
    out.pressure = x.segment(nv, np);
    return out;
}

Vector project_divergence_free(const FESpaces& spaces, const AssembledOperators& ops, const Vector& u) {
    SaddleSolver solver(spaces, ops);
    solver.factorize(ops.mass);
    return solver.solve(ops.mass * u, Vector::Zero(spaces.pressure_dim())).velocity;
}

}  // namespace tns
