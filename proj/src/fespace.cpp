#include "tns/fespace.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "assembly.hpp"

namespace tns {

FESpaces::FESpaces(std::shared_ptr<const PeriodicMesh> mesh)
    : mesh_(std::move(mesh)), rule_(default_tet_rule()) {
    if (!mesh_) throw std::invalid_argument("FESpaces: null mesh");
    n_vertices_ = static_cast<int>(mesh_->num_vertices());
    n_scalar_ = n_vertices_ + static_cast<int>(mesh_->num_tets());
    precompute_geometry();
    assemble_scalar_operators();
}

void FESpaces::precompute_geometry() {
    const std::size_t nt = mesh_->num_tets();
    volumes_.resize(nt);
    grad_lambda_.resize(nt);
    volume_ = 0.0;
    for (std::size_t e = 0; e < nt; ++e) {
        const auto& p = mesh_->tet_points[e];
        Eigen::Matrix3d J;
        J.col(0) = p[1] - p[0];
        J.col(1) = p[2] - p[0];
        J.col(2) = p[3] - p[0];
        const double det = J.determinant();
        if (!(det > 0.0)) throw std::runtime_error("FESpaces: degenerate or inverted element");
        volumes_[e] = det / 6.0;
        volume_ += volumes_[e];
        const Eigen::Matrix3d Jit = J.inverse().transpose();
        grad_lambda_[e][1] = Jit.col(0);
        grad_lambda_[e][2] = Jit.col(1);
        grad_lambda_[e][3] = Jit.col(2);
        grad_lambda_[e][0] = -(grad_lambda_[e][1] + grad_lambda_[e][2] + grad_lambda_[e][3]);
    }

    const std::size_t nq = rule_.size();
    shape_.resize(nq);
    bubble_factor_.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        const auto& l = rule_.bary[q];
        for (int i = 0; i < 4; ++i) shape_[q][i] = l[i];
        shape_[q][4] = 256.0 * l[0] * l[1] * l[2] * l[3];
        for (int i = 0; i < 4; ++i) {
            double prod = 256.0;
            for (int j = 0; j < 4; ++j)
                if (j != i) prod *= l[j];
            bubble_factor_[q][i] = prod;
        }
    }
}

LocalDofs FESpaces::velocity_dofs(std::size_t e) const {
    const auto& t = mesh_->tets[e];
    return {t[0], t[1], t[2], t[3], n_vertices_ + static_cast<int>(e)};
}

Vec3 FESpaces::point(std::size_t e, std::size_t q) const {
    const auto& p = mesh_->tet_points[e];
    const auto& l = rule_.bary[q];
    return l[0] * p[0] + l[1] * p[1] + l[2] * p[2] + l[3] * p[3];
}

Vec3 FESpaces::shape_grad(std::size_t e, std::size_t q, int a) const {
    if (a < 4) return grad_lambda_[e][a];
    const auto& g = grad_lambda_[e];
    const auto& b = bubble_factor_[q];
    return b[0] * g[0] + b[1] * g[1] + b[2] * g[2] + b[3] * g[3];
}

void FESpaces::assemble_scalar_operators() {
    const std::size_t nt = num_elements();
    const std::size_t nq = num_qp();
    auto vdofs = [this](std::size_t e) { return velocity_dofs(e); };
    auto pdofs = [this](std::size_t e) { return mesh_->tets[e]; };

    mass_s_ = detail::assemble_local<kLocalVelocity, kLocalVelocity>(
        nt, n_scalar_, n_scalar_, vdofs, vdofs, [&](std::size_t e, auto& K) {
            for (std::size_t q = 0; q < nq; ++q) {
                const double w = jxw(e, q);
                for (int a = 0; a < kLocalVelocity; ++a)
                    for (int b = 0; b < kLocalVelocity; ++b) K(a, b) += w * shape(q, a) * shape(q, b);
            }
        });
    stiff_s_ = detail::assemble_local<kLocalVelocity, kLocalVelocity>(
        nt, n_scalar_, n_scalar_, vdofs, vdofs, [&](std::size_t e, auto& K) {
            for (std::size_t q = 0; q < nq; ++q) {
                const double w = jxw(e, q);
                std::array<Vec3, kLocalVelocity> g;
                for (int a = 0; a < kLocalVelocity; ++a) g[a] = shape_grad(e, q, a);
                for (int a = 0; a < kLocalVelocity; ++a)
                    for (int b = 0; b < kLocalVelocity; ++b) K(a, b) += w * g[a].dot(g[b]);
            }
        });
    mass_p_ = detail::assemble_local<kLocalPressure, kLocalPressure>(
        nt, n_vertices_, n_vertices_, pdofs, pdofs, [&](std::size_t e, auto& K) {
            for (std::size_t q = 0; q < nq; ++q) {
                const double w = jxw(e, q);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) K(a, b) += w * pshape(q, a) * pshape(q, b);
            }
        });
    for (int axis = 0; axis < 3; ++axis) {
        div_blocks_[axis] = detail::assemble_local<kLocalPressure, kLocalVelocity>(
            nt, n_vertices_, n_scalar_, pdofs, vdofs, [&](std::size_t e, auto& K) {
                for (std::size_t q = 0; q < nq; ++q) {
                    const double w = jxw(e, q);
                    for (int b = 0; b < kLocalVelocity; ++b) {
                        const double d = shape_grad(e, q, b)[axis];
                        for (int a = 0; a < 4; ++a) K(a, b) += w * pshape(q, a) * d;
                    }
                }
            });
    }
    // The hats alone form a partition of unity: (phi_s, 1) = sum_hats (phi_s, hat).
    Vector unit = Vector::Zero(n_scalar_);
    unit.head(n_vertices_).setOnes();
    int_s_ = mass_s_ * unit;
    int_p_ = mass_p_ * Vector::Ones(n_vertices_).eval();

    mass_s_solver_.compute(mass_s_);
    if (mass_s_solver_.info() != Eigen::Success)
        throw std::runtime_error("FESpaces: velocity mass matrix is singular (broken mesh?)");
    mass_p_solver_.compute(mass_p_);
    if (mass_p_solver_.info() != Eigen::Success)
        throw std::runtime_error("FESpaces: pressure mass matrix is singular (broken mesh?)");
}

Vec3 FESpaces::velocity_value(const Vector& u, std::size_t e, std::size_t q) const {
    const auto d = velocity_dofs(e);
    Vec3 v = Vec3::Zero();
    for (int c = 0; c < 3; ++c) {
        const double* uc = u.data() + static_cast<std::ptrdiff_t>(c) * n_scalar_;
        double s = 0.0;
        for (int a = 0; a < kLocalVelocity; ++a) s += uc[d[a]] * shape_[q][a];
        v[c] = s;
    }
    return v;
}

Eigen::Matrix3d FESpaces::velocity_gradient(const Vector& u, std::size_t e, std::size_t q) const {
    const auto d = velocity_dofs(e);
    Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
    for (int a = 0; a < kLocalVelocity; ++a) {
        const Vec3 g = shape_grad(e, q, a);
        for (int c = 0; c < 3; ++c) G.row(c) += u[c * n_scalar_ + d[a]] * g.transpose();
    }
    return G;
}

double FESpaces::pressure_value(const Vector& p, std::size_t e, std::size_t q) const {
    const auto& t = mesh_->tets[e];
    double s = 0.0;
    for (int a = 0; a < 4; ++a) s += p[t[a]] * rule_.bary[q][a];
    return s;
}

Vec3 FESpaces::pressure_gradient(const Vector& p, std::size_t e) const {
    const auto& t = mesh_->tets[e];
    Vec3 g = Vec3::Zero();
    for (int a = 0; a < 4; ++a) g += p[t[a]] * grad_lambda_[e][a];
    return g;
}

Vector FESpaces::solve_scalar_mass(const Vector& rhs) const { return mass_s_solver_.solve(rhs); }
Vector FESpaces::solve_pressure_mass(const Vector& rhs) const { return mass_p_solver_.solve(rhs); }

Vector FESpaces::l2_project_velocity(const VectorSampler& f) const {
    const std::size_t nq = num_qp();
    using Local = Eigen::Matrix<double, 3 * kLocalVelocity, 1>;
    auto dofs = [this](std::size_t e) {
        const auto d = velocity_dofs(e);
        std::array<int, 3 * kLocalVelocity> out;
        for (int c = 0; c < 3; ++c)
            for (int a = 0; a < kLocalVelocity; ++a) out[c * kLocalVelocity + a] = c * n_scalar_ + d[a];
        return out;
    };
    const Vector rhs = detail::assemble_vector<3 * kLocalVelocity>(
        num_elements(), velocity_dim(), dofs, [&](std::size_t e, Local& F) {
            for (std::size_t q = 0; q < nq; ++q) {
                const Vec3 v = f(e, q, point(e, q));
                const double w = jxw(e, q);
                for (int c = 0; c < 3; ++c)
                    for (int a = 0; a < kLocalVelocity; ++a) F[c * kLocalVelocity + a] += w * v[c] * shape(q, a);
            }
        });
    Vector out(velocity_dim());
    for (int c = 0; c < 3; ++c)
        out.segment(c * n_scalar_, n_scalar_) = solve_scalar_mass(rhs.segment(c * n_scalar_, n_scalar_));
    return out;
}

Vector FESpaces::l2_project_pressure(const ScalarSampler& g) const {
    const std::size_t nq = num_qp();
    using Local = Eigen::Matrix<double, kLocalPressure, 1>;
    const Vector rhs = detail::assemble_vector<kLocalPressure>(
        num_elements(), pressure_dim(), [this](std::size_t e) { return mesh_->tets[e]; },
        [&](std::size_t e, Local& F) {
            for (std::size_t q = 0; q < nq; ++q) {
                const double v = g(e, q, point(e, q)) * jxw(e, q);
                for (int a = 0; a < 4; ++a) F[a] += v * pshape(q, a);
            }
        });
    return solve_pressure_mass(rhs);
}

Vector FESpaces::project_velocity(const VectorSampler& f) const {
    Vector u = l2_project_velocity(f);
    remove_velocity_mean(u);
    return u;
}

Vector FESpaces::project_velocity(const VectorFn& f) const {
    return project_velocity(VectorSampler([&f](std::size_t, std::size_t, const Vec3& x) { return f(x); }));
}

Vector FESpaces::project_pressure(const ScalarSampler& g) const {
    Vector p = l2_project_pressure(g);
    remove_pressure_mean(p);
    return p;
}

Vector FESpaces::project_pressure(const ScalarFn& g) const {
    return project_pressure(ScalarSampler([&g](std::size_t, std::size_t, const Vec3& x) { return g(x); }));
}

Vec3 FESpaces::velocity_mean(const Vector& u) const {
    Vec3 m;
    for (int c = 0; c < 3; ++c) m[c] = int_s_.dot(u.segment(c * n_scalar_, n_scalar_)) / volume_;
    return m;
}

double FESpaces::pressure_mean(const Vector& p) const { return int_p_.dot(p) / volume_; }

void FESpaces::remove_velocity_mean(Vector& u) const {
    const Vec3 m = velocity_mean(u);
    for (int c = 0; c < 3; ++c) u.segment(c * n_scalar_, n_vertices_).array() -= m[c];
}

void FESpaces::remove_pressure_mean(Vector& p) const { p.array() -= pressure_mean(p); }

double FESpaces::velocity_dot_l2(const Vector& u, const Vector& v) const {
    double s = 0.0;
    for (int c = 0; c < 3; ++c)
        s += u.segment(c * n_scalar_, n_scalar_).dot(mass_s_ * v.segment(c * n_scalar_, n_scalar_));
    return s;
}

double FESpaces::velocity_l2_sq(const Vector& u) const { return velocity_dot_l2(u, u); }
double FESpaces::velocity_l2(const Vector& u) const { return std::sqrt(std::max(0.0, velocity_l2_sq(u))); }

double FESpaces::velocity_grad_l2_sq(const Vector& u) const {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto uc = u.segment(c * n_scalar_, n_scalar_);
        s += uc.dot(stiff_s_ * uc);
    }
    return s;
}

double FESpaces::velocity_grad_l2(const Vector& u) const {
    return std::sqrt(std::max(0.0, velocity_grad_l2_sq(u)));
}

double FESpaces::velocity_h1(const Vector& u) const {
    return std::sqrt(std::max(0.0, velocity_l2_sq(u) + velocity_grad_l2_sq(u)));
}

double FESpaces::velocity_lp(const Vector& u, double p) const {
    const std::size_t nq = num_qp();
    const double s = detail::sum_elements(num_elements(), [&](std::size_t e) {
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) acc += jxw(e, q) * std::pow(velocity_value(u, e, q).norm(), p);
        return acc;
    });
    return std::pow(s, 1.0 / p);
}

double FESpaces::pressure_l2(const Vector& p) const { return std::sqrt(std::max(0.0, p.dot(mass_p_ * p))); }

Vector FESpaces::divergence_pairing(const Vector& u) const {
    Vector r = Vector::Zero(pressure_dim());
    for (int c = 0; c < 3; ++c) r += div_blocks_[c] * u.segment(c * n_scalar_, n_scalar_);
    return r;
}

double FESpaces::divergence_dual_norm(const Vector& u) const {
    const Vector r = divergence_pairing(u);
    return std::sqrt(std::max(0.0, r.dot(solve_pressure_mass(r))));
}

// --- structural constants ------------------------------------------------------

namespace {

/// Basis of the Mp-complement of constants: columns e_i - (w_i / w_last) e_last.
Matrix zero_mean_basis(const Vector& integrals) {
    const int n = static_cast<int>(integrals.size());
    Matrix Z = Matrix::Zero(n, n - 1);
    for (int i = 0; i < n - 1; ++i) {
        Z(i, i) = 1.0;
        Z(n - 1, i) = -integrals[i] / integrals[n - 1];
    }
    return Z;
}

double min_generalized_eigenvalue(const Matrix& A, const Matrix& B) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A, B, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigen-solver failed");
    return es.eigenvalues().minCoeff();
}

double max_generalized_eigenvalue(const Matrix& A, const Matrix& B) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A, B, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigen-solver failed");
    return es.eigenvalues().maxCoeff();
}

Matrix symmetrize(const Matrix& A) { return 0.5 * (A + A.transpose()); }

}  // namespace

double inf_sup_constant(const FESpaces& spaces, bool restrict_to_zero_mean) {
    // S = sum_d G_d^T Ms^{-1} G_d with G_d(s, p) = (phi_s, d_d psi_p) = -(d_d phi_s, psi_p).
    const int np = spaces.pressure_dim();
    Matrix S = Matrix::Zero(np, np);
    for (int d = 0; d < 3; ++d) {
        const Matrix G = -Matrix(spaces.divergence_block(d)).transpose();
        Matrix X(G.rows(), G.cols());
        for (int j = 0; j < G.cols(); ++j) X.col(j) = spaces.solve_scalar_mass(G.col(j));
        S += G.transpose() * X;
    }
    S = symmetrize(S);
    const Matrix Mp(spaces.pressure_mass());
    double lmin = 0.0;
    if (restrict_to_zero_mean) {
        const Matrix Z = zero_mean_basis(spaces.pressure_integrals());
        lmin = min_generalized_eigenvalue(symmetrize(Z.transpose() * S * Z),
                                          symmetrize(Z.transpose() * Mp * Z));
    } else {
        lmin = min_generalized_eigenvalue(S, Mp);
    }
    return std::sqrt(std::max(0.0, lmin));
}

double inverse_ratio(const FESpaces& spaces) {
    const Matrix M(spaces.scalar_mass());
    const Matrix A(spaces.scalar_stiffness());
    return std::sqrt(1.0 + std::max(0.0, max_generalized_eigenvalue(A, M)));
}

double inverse_constant(const FESpaces& spaces) { return inverse_ratio(spaces) * spaces.h(); }

CommutatorMeasure commutator_defect(const FESpaces& spaces, const Vector& v, const TrigPoly& phi,
                                    int l, int m) {
    if (l < 0 || l > 1 || m < l || m > 1)
        throw std::invalid_argument("commutator_defect: need 0 <= l <= m <= 1");
    const Vector pv = spaces.l2_project_velocity([&](std::size_t e, std::size_t q, const Vec3& x) {
        return Vec3(phi(x) * spaces.velocity_value(v, e, q));
    });
    const std::size_t nq = spaces.num_qp();
    const double err_sq = detail::sum_elements(spaces.num_elements(), [&](std::size_t e) {
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            const Vec3 x = spaces.point(e, q);
            const double f = phi(x);
            const Vec3 vq = spaces.velocity_value(v, e, q);
            Vec3 diff = f * vq - spaces.velocity_value(pv, e, q);
            double s = diff.squaredNorm();
            if (l == 1) {
                const Eigen::Matrix3d grad = f * spaces.velocity_gradient(v, e, q) +
                                             vq * phi.gradient(x).transpose() -
                                             spaces.velocity_gradient(pv, e, q);
                s += grad.squaredNorm();
            }
            acc += spaces.jxw(e, q) * s;
        }
        return acc;
    });
    CommutatorMeasure out;
    out.defect = std::sqrt(std::max(0.0, err_sq));
    const double vnorm = (m == 0) ? spaces.velocity_l2(v) : spaces.velocity_h1(v);
    const double denom = std::pow(spaces.h(), 1 + m - l) * vnorm * phi.w_inf_bound(m + 1);
    out.ratio = denom > 0.0 ? out.defect / denom : 0.0;
    return out;
}

CommutatorMeasure pressure_commutator_defect(const FESpaces& spaces, const Vector& q,
                                             const TrigPoly& phi) {
    const Vector kq = spaces.l2_project_pressure([&](std::size_t e, std::size_t iq, const Vec3& x) {
        return phi(x) * spaces.pressure_value(q, e, iq);
    });
    const std::size_t nq = spaces.num_qp();
    const double err_sq = detail::sum_elements(spaces.num_elements(), [&](std::size_t e) {
        double acc = 0.0;
        for (std::size_t iq = 0; iq < nq; ++iq) {
            const double d = phi(spaces.point(e, iq)) * spaces.pressure_value(q, e, iq) -
                             spaces.pressure_value(kq, e, iq);
            acc += spaces.jxw(e, iq) * d * d;
        }
        return acc;
    });
    CommutatorMeasure out;
    out.defect = std::sqrt(std::max(0.0, err_sq));
    const double denom = spaces.h() * spaces.pressure_l2(q) * phi.w_inf_bound(1);
    out.ratio = denom > 0.0 ? out.defect / denom : 0.0;
    return out;
}

double velocity_commutator_constant(const FESpaces& spaces, const TrigPoly& phi) {
    // Scalar space suffices: multiplication by phi acts component-wise.
    const auto nt = spaces.num_elements();
    const auto nq = spaces.num_qp();
    const int ns = spaces.scalar_dim();
    auto dofs = [&](std::size_t e) { return spaces.velocity_dofs(e); };
    // Mphi(a,b) = (phi_a, phi phi_b); Hphi(a,b) = (phi_a, phi phi_b)_{H1};
    // Hphiphi(a,b) = (phi phi_a, phi phi_b)_{H1}.
    const SpMat Mphi = detail::assemble_local<kLocalVelocity, kLocalVelocity>(
        nt, ns, ns, dofs, dofs, [&](std::size_t e, auto& K) {
            for (std::size_t q = 0; q < nq; ++q) {
                const double w = spaces.jxw(e, q) * phi(spaces.point(e, q));
                for (int a = 0; a < kLocalVelocity; ++a)
                    for (int b = 0; b < kLocalVelocity; ++b) K(a, b) += w * spaces.shape(q, a) * spaces.shape(q, b);
            }
        });
    const SpMat Hphi = detail::assemble_local<kLocalVelocity, kLocalVelocity>(
        nt, ns, ns, dofs, dofs, [&](std::size_t e, auto& K) {
            for (std::size_t q = 0; q < nq; ++q) {
                const Vec3 x = spaces.point(e, q);
                const double f = phi(x);
                const Vec3 gf = phi.gradient(x);
                const double w = spaces.jxw(e, q);
                for (int a = 0; a < kLocalVelocity; ++a) {
                    const Vec3 ga = spaces.shape_grad(e, q, a);
                    for (int b = 0; b < kLocalVelocity; ++b) {
                        const Vec3 gb = f * spaces.shape_grad(e, q, b) + spaces.shape(q, b) * gf;
                        K(a, b) += w * (f * spaces.shape(q, a) * spaces.shape(q, b) + ga.dot(gb));
                    }
                }
            }
        });
    const SpMat Hphiphi = detail::assemble_local<kLocalVelocity, kLocalVelocity>(
        nt, ns, ns, dofs, dofs, [&](std::size_t e, auto& K) {
            for (std::size_t q = 0; q < nq; ++q) {
                const Vec3 x = spaces.point(e, q);
                const double f = phi(x);
                const Vec3 gf = phi.gradient(x);
                const double w = spaces.jxw(e, q);
                std::array<Vec3, kLocalVelocity> g;
                for (int a = 0; a < kLocalVelocity; ++a)
                    g[a] = f * spaces.shape_grad(e, q, a) + spaces.shape(q, a) * gf;
                for (int a = 0; a < kLocalVelocity; ++a)
                    for (int b = 0; b < kLocalVelocity; ++b)
                        K(a, b) += w * (f * f * spaces.shape(q, a) * spaces.shape(q, b) + g[a].dot(g[b]));
            }
        });
    const Matrix H = Matrix(spaces.scalar_mass()) + Matrix(spaces.scalar_stiffness());
    Matrix P(ns, ns);
    const Matrix MphiD(Mphi);
    for (int j = 0; j < ns; ++j) P.col(j) = spaces.solve_scalar_mass(MphiD.col(j));
    const Matrix HphiD(Hphi);
    const Matrix Q = symmetrize(Matrix(Hphiphi) - HphiD.transpose() * P - P.transpose() * HphiD +
                                P.transpose() * H * P);
    const double lmax = max_generalized_eigenvalue(Q, symmetrize(H));
    return std::sqrt(std::max(0.0, lmax)) / (spaces.h() * phi.w_inf_bound(2));
}

double pressure_commutator_constant(const FESpaces& spaces, const TrigPoly& phi) {
    const auto nt = spaces.num_elements();
    const auto nq = spaces.num_qp();
    const int np = spaces.pressure_dim();
    auto dofs = [&](std::size_t e) { return spaces.pressure_dofs(e); };
    auto weighted_mass = [&](int power) {
        return detail::assemble_local<kLocalPressure, kLocalPressure>(
            nt, np, np, dofs, dofs, [&](std::size_t e, auto& K) {
                for (std::size_t q = 0; q < nq; ++q) {
                    const double w = spaces.jxw(e, q) * std::pow(phi(spaces.point(e, q)), power);
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b) K(a, b) += w * spaces.pshape(q, a) * spaces.pshape(q, b);
                }
            });
    };
    const Matrix M1(weighted_mass(1));
    const Matrix M2(weighted_mass(2));
    Matrix X(np, np);
    for (int j = 0; j < np; ++j) X.col(j) = spaces.solve_pressure_mass(M1.col(j));
    const Matrix Q = symmetrize(M2 - M1.transpose() * X);
    const double lmax = max_generalized_eigenvalue(Q, Matrix(spaces.pressure_mass()));
    return std::sqrt(std::max(0.0, lmax)) / (spaces.h() * phi.w_inf_bound(1));
}

}  // namespace tns
