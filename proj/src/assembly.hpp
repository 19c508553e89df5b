// Element loop helpers shared by the assembly routines.
#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tns/parallel.hpp"

namespace tns::detail {

/// Computes one R x C local matrix per element in parallel, then scatters them
/// in element order so the result does not depend on the worker count.
template <int R, int C, class RowDofs, class ColDofs, class Kernel>
Eigen::SparseMatrix<double> assemble_local(std::size_t n_elements, int rows, int cols,
                                           RowDofs row_dofs, ColDofs col_dofs, Kernel kernel) {
    using Local = Eigen::Matrix<double, R, C>;
    std::vector<Local, Eigen::aligned_allocator<Local>> local(n_elements);
    parallel_for(n_elements, [&](std::size_t e) {
        local[e].setZero();
        kernel(e, local[e]);
    });
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n_elements * R * C);
    for (std::size_t e = 0; e < n_elements; ++e) {
        const auto rd = row_dofs(e);
        const auto cd = col_dofs(e);
        for (int a = 0; a < R; ++a)
            for (int b = 0; b < C; ++b) trip.emplace_back(rd[a], cd[b], local[e](a, b));
    }
    Eigen::SparseMatrix<double> m(rows, cols);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

/// Element-wise scalar sums reduced in element order.
template <class Kernel>
double sum_elements(std::size_t n_elements, Kernel kernel) {
    std::vector<double> part(n_elements, 0.0);
    parallel_for(n_elements, [&](std::size_t e) { part[e] = kernel(e); });
    double s = 0.0;
    for (double v : part) s += v;
    return s;
}

/// Per-element local vectors scattered in element order.
template <int R, class Dofs, class Kernel>
Eigen::VectorXd assemble_vector(std::size_t n_elements, int size, Dofs dofs, Kernel kernel) {
    using Local = Eigen::Matrix<double, R, 1>;
    std::vector<Local, Eigen::aligned_allocator<Local>> local(n_elements);
    parallel_for(n_elements, [&](std::size_t e) {
        local[e].setZero();
        kernel(e, local[e]);
    });
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
    for (std::size_t e = 0; e < n_elements; ++e) {
        const auto d = dofs(e);
        for (int a = 0; a < R; ++a) out[d[a]] += local[e][a];
    }
    return out;
}

}  // namespace tns::detail
