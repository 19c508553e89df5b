#include "tns/forms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "assembly.hpp"

namespace tns {

namespace {

constexpr int kLocalVector = 3 * kLocalVelocity;

std::array<int, kLocalVector> vector_dofs(const FESpaces& s, std::size_t e) {
    const auto d = s.velocity_dofs(e);
    std::array<int, kLocalVector> out;
    for (int c = 0; c < 3; ++c)
        for (int a = 0; a < kLocalVelocity; ++a) out[c * kLocalVelocity + a] = c * s.scalar_dim() + d[a];
    return out;
}

SpMat block_diagonal(const SpMat& block) {
    const int n = static_cast<int>(block.rows());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * block.nonZeros());
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < block.outerSize(); ++k)
            for (SpMat::InnerIterator it(block, k); it; ++it)
                trip.emplace_back(c * n + it.row(), c * n + it.col(), it.value());
    SpMat out(3 * n, 3 * n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace

AssembledOperators assemble_operators(const FESpaces& spaces) {
    AssembledOperators ops;
    ops.mass = block_diagonal(spaces.scalar_mass());
    ops.stiffness = block_diagonal(spaces.scalar_stiffness());

    const int ns = spaces.scalar_dim();
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < 3; ++c) {
        const SpMat& D = spaces.divergence_block(c);
        for (int k = 0; k < D.outerSize(); ++k)
            for (SpMat::InnerIterator it(D, k); it; ++it) trip.emplace_back(it.row(), c * ns + it.col(), it.value());
    }
    ops.divergence.resize(spaces.pressure_dim(), spaces.velocity_dim());
    ops.divergence.setFromTriplets(trip.begin(), trip.end());

    ops.velocity_mean_rows = Matrix::Zero(3, spaces.velocity_dim());
    for (int c = 0; c < 3; ++c) ops.velocity_mean_rows.row(c).segment(c * ns, ns) = spaces.scalar_integrals().transpose();
    ops.pressure_mean_row = spaces.pressure_integrals();
    return ops;
}

ConvectiveCase convective_case_from_int(int c) {
    switch (c) {
        case 1: return ConvectiveCase::Symmetrized;
        case 2: return ConvectiveCase::Rotational;
        case 3: return ConvectiveCase::RotationalBernoulli;
        default: throw std::invalid_argument("convective case must be 1, 2 or 3, got " + std::to_string(c));
    }
}

int to_int(ConvectiveCase c) { return static_cast<int>(c); }

double b_case1(const FESpaces& spaces, const Vector& u, const Vector& v, const Vector& w) {
    const std::size_t nq = spaces.num_qp();
    return detail::sum_elements(spaces.num_elements(), [&](std::size_t e) {
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            const Vec3 uq = spaces.velocity_value(u, e, q);
            const Vec3 vq = spaces.velocity_value(v, e, q);
            const Vec3 wq = spaces.velocity_value(w, e, q);
            const Eigen::Matrix3d gu = spaces.velocity_gradient(u, e, q);
            const Eigen::Matrix3d gv = spaces.velocity_gradient(v, e, q);
            acc += spaces.jxw(e, q) * ((gv * uq).dot(wq) + 0.5 * gu.trace() * vq.dot(wq));
        }
        return acc;
    });
}

double b_case2(const FESpaces& spaces, const Vector& u, const Vector& v, const Vector& w) {
    const std::size_t nq = spaces.num_qp();
    return detail::sum_elements(spaces.num_elements(), [&](std::size_t e) {
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            const Vec3 omega = curl_of(spaces.velocity_gradient(u, e, q));
            acc += spaces.jxw(e, q) *
                   omega.cross(spaces.velocity_value(v, e, q)).dot(spaces.velocity_value(w, e, q));
        }
        return acc;
    });
}

Vector bernoulli_projection(const FESpaces& spaces, const Vector& u, const Vector& v) {
    return spaces.project_pressure(ScalarSampler([&](std::size_t e, std::size_t q, const Vec3&) {
        return spaces.velocity_value(u, e, q).dot(spaces.velocity_value(v, e, q));
    }));
}

double b_case3(const FESpaces& spaces, const Vector& u, const Vector& v, const Vector& w) {
    const Vector k = bernoulli_projection(spaces, u, v);
    return b_case2(spaces, u, v, w) - 0.5 * k.dot(spaces.divergence_pairing(w));
}

ConvectiveForm::ConvectiveForm(const FESpaces& spaces, ConvectiveCase which)
    : spaces_(&spaces), case_(which), divergence_(assemble_operators(spaces).divergence) {}

double ConvectiveForm::evaluate(const Vector& u, const Vector& v, const Vector& w) const {
    switch (case_) {
        case ConvectiveCase::Symmetrized: return b_case1(*spaces_, u, v, w);
        case ConvectiveCase::Rotational: return b_case2(*spaces_, u, v, w);
        case ConvectiveCase::RotationalBernoulli: return b_case3(*spaces_, u, v, w);
    }
    return 0.0;
}

SpMat ConvectiveForm::frozen_matrix(const Vector& a) const {
    const FESpaces& s = *spaces_;
    const std::size_t nq = s.num_qp();
    auto dofs = [&s](std::size_t e) { return vector_dofs(s, e); };
    const bool symmetrized = case_ == ConvectiveCase::Symmetrized;
    return detail::assemble_local<kLocalVector, kLocalVector>(
        s.num_elements(), s.velocity_dim(), s.velocity_dim(), dofs, dofs, [&](std::size_t e, auto& K) {
            std::array<Vec3, kLocalVelocity> g;
            for (std::size_t q = 0; q < nq; ++q) {
                const double w = s.jxw(e, q);
                const Vec3 aq = s.velocity_value(a, e, q);
                const Eigen::Matrix3d ga = s.velocity_gradient(a, e, q);
                for (int b = 0; b < kLocalVelocity; ++b) g[b] = s.shape_grad(e, q, b);
                if (symmetrized) {
                    const double half_div = 0.5 * ga.trace();
                    for (int i = 0; i < kLocalVelocity; ++i) {
                        const double wi = w * s.shape(q, i);
                        for (int j = 0; j < kLocalVelocity; ++j) {
                            const double val = wi * (aq.dot(g[j]) + half_div * s.shape(q, j));
                            for (int c = 0; c < 3; ++c) K(c * kLocalVelocity + i, c * kLocalVelocity + j) += val;
                        }
                    }
                } else {
                    // (omega x e_k) . e_i couples trial component k to test component i.
                    const Vec3 omega = curl_of(ga);
                    Eigen::Matrix3d cross;
                    for (int k = 0; k < 3; ++k) cross.col(k) = omega.cross(Vec3::Unit(k));
                    for (int i = 0; i < kLocalVelocity; ++i)
                        for (int j = 0; j < kLocalVelocity; ++j) {
                            const double mass = w * s.shape(q, i) * s.shape(q, j);
                            for (int ci = 0; ci < 3; ++ci)
                                for (int ck = 0; ck < 3; ++ck)
                                    if (cross(ci, ck) != 0.0)
                                        K(ci * kLocalVelocity + i, ck * kLocalVelocity + j) += mass * cross(ci, ck);
                        }
                }
            }
        });
}

SpMat ConvectiveForm::bernoulli_coupling(const Vector& a) const {
    const FESpaces& s = *spaces_;
    const std::size_t nq = s.num_qp();
    return detail::assemble_local<kLocalPressure, kLocalVector>(
        s.num_elements(), s.pressure_dim(), s.velocity_dim(), [&s](std::size_t e) { return s.pressure_dofs(e); },
        [&s](std::size_t e) { return vector_dofs(s, e); }, [&](std::size_t e, auto& K) {
            for (std::size_t q = 0; q < nq; ++q) {
                const Vec3 aq = s.velocity_value(a, e, q);
                const double w = s.jxw(e, q);
                for (int p = 0; p < 4; ++p)
                    for (int j = 0; j < kLocalVelocity; ++j) {
                        const double base = w * s.pshape(q, p) * s.shape(q, j);
                        for (int c = 0; c < 3; ++c) K(p, c * kLocalVelocity + j) += base * aq[c];
                    }
            }
        });
}

Vector ConvectiveForm::apply(const Vector& a, const Vector& v) const {
    Vector r = frozen_matrix(a) * v;
    if (case_ == ConvectiveCase::RotationalBernoulli) {
        const Vector k = bernoulli_projection(*spaces_, a, v);
        r -= 0.5 * (divergence_.transpose() * k);
    }
    return r;
}

double estimate_constants(const ConvectiveForm& form, const std::vector<TrilinearSample>& samples) {
    const FESpaces& s = form.spaces();
    double best = 0.0;
    for (const auto& smp : samples) {
        const double denom = s.velocity_grad_l2(smp.u) * s.velocity_grad_l2(smp.v) *
                             std::sqrt(s.velocity_l2(smp.w) * s.velocity_grad_l2(smp.w));
        if (!(denom > 0.0)) continue;
        best = std::max(best, std::abs(form.evaluate(smp.u, smp.v, smp.w)) / denom);
    }
    return best;
}

}  // namespace tns
