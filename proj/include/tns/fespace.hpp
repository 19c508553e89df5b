// MINI velocity space (P1 + cubic bubble per component) and continuous P1
// pressure space on a PeriodicMesh, with L2 projections and measured
// structural constants.
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "tns/fields.hpp"
#include "tns/mesh.hpp"
#include "tns/quadrature.hpp"

namespace tns {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Local scalar velocity shape functions: 4 barycentric hats then the bubble.
inline constexpr int kLocalVelocity = 5;
inline constexpr int kLocalPressure = 4;

using LocalDofs = std::array<int, kLocalVelocity>;

/// Sampler of a field at quadrature point q of element e with physical point x.
using VectorSampler = std::function<Vec3(std::size_t e, std::size_t q, const Vec3& x)>;
using ScalarSampler = std::function<double(std::size_t e, std::size_t q, const Vec3& x)>;

/// Velocity coefficients are laid out component-blocked:
/// index = component * scalar_dim() + scalar dof, where scalar dofs are the
/// mesh vertices followed by one bubble per tetrahedron.
class FESpaces {
public:
    explicit FESpaces(std::shared_ptr<const PeriodicMesh> mesh);

    [[nodiscard]] const PeriodicMesh& mesh() const { return *mesh_; }
    [[nodiscard]] std::shared_ptr<const PeriodicMesh> mesh_ptr() const { return mesh_; }
    [[nodiscard]] double h() const { return mesh_->h; }
    [[nodiscard]] double volume() const { return volume_; }

    [[nodiscard]] int scalar_dim() const { return n_scalar_; }
    [[nodiscard]] int velocity_dim() const { return 3 * n_scalar_; }
    [[nodiscard]] int pressure_dim() const { return n_vertices_; }
    [[nodiscard]] std::size_t num_elements() const { return mesh_->num_tets(); }

    // --- element quadrature data -------------------------------------------
    [[nodiscard]] const TetRule& rule() const { return rule_; }
    [[nodiscard]] std::size_t num_qp() const { return rule_.size(); }
    [[nodiscard]] LocalDofs velocity_dofs(std::size_t e) const;
    [[nodiscard]] const Tet& pressure_dofs(std::size_t e) const { return mesh_->tets[e]; }
    /// Quadrature weight times element volume.
    [[nodiscard]] double jxw(std::size_t e, std::size_t q) const { return rule_.weights[q] * volumes_[e]; }
    [[nodiscard]] Vec3 point(std::size_t e, std::size_t q) const;
    /// Value of local velocity shape function a at reference point q.
    [[nodiscard]] double shape(std::size_t q, int a) const { return shape_[q][a]; }
    /// Gradient of local velocity shape function a on element e at point q.
    [[nodiscard]] Vec3 shape_grad(std::size_t e, std::size_t q, int a) const;
    /// Pressure (P1) shape value / gradient.
    [[nodiscard]] double pshape(std::size_t q, int a) const { return rule_.bary[q][a]; }
    [[nodiscard]] const Vec3& pshape_grad(std::size_t e, int a) const { return grad_lambda_[e][a]; }

    // --- evaluation of discrete functions -----------------------------------
    [[nodiscard]] Vec3 velocity_value(const Vector& u, std::size_t e, std::size_t q) const;
    /// (i, j) = d_j u_i
    [[nodiscard]] Eigen::Matrix3d velocity_gradient(const Vector& u, std::size_t e, std::size_t q) const;
    [[nodiscard]] double pressure_value(const Vector& p, std::size_t e, std::size_t q) const;
    [[nodiscard]] Vec3 pressure_gradient(const Vector& p, std::size_t e) const;

    // --- assembled scalar operators ---------------------------------------
    [[nodiscard]] const SpMat& scalar_mass() const { return mass_s_; }
    [[nodiscard]] const SpMat& scalar_stiffness() const { return stiff_s_; }
    [[nodiscard]] const SpMat& pressure_mass() const { return mass_p_; }
    /// (psi_p, d_axis phi_s), pressure rows by scalar velocity columns.
    [[nodiscard]] const SpMat& divergence_block(int axis) const { return div_blocks_[axis]; }
    /// Integrals of the scalar velocity / pressure basis functions.
    [[nodiscard]] const Vector& scalar_integrals() const { return int_s_; }
    [[nodiscard]] const Vector& pressure_integrals() const { return int_p_; }

    // --- projections ---------------------------------------------------------
    /// L2 projection onto the full MINI space (constants included).
    [[nodiscard]] Vector l2_project_velocity(const VectorSampler& f) const;
    /// L2 projection onto the full P1 space (constants included).
    [[nodiscard]] Vector l2_project_pressure(const ScalarSampler& g) const;
    /// pi_h: L2 projection onto the zero-mean velocity space X_h.
    [[nodiscard]] Vector project_velocity(const VectorFn& f) const;
    [[nodiscard]] Vector project_velocity(const VectorSampler& f) const;
    /// K_h: L2 projection onto the zero-mean pressure space M_h.
    [[nodiscard]] Vector project_pressure(const ScalarFn& g) const;
    [[nodiscard]] Vector project_pressure(const ScalarSampler& g) const;
    /// Solve with the scalar velocity / pressure mass matrix.
    [[nodiscard]] Vector solve_scalar_mass(const Vector& rhs) const;
    [[nodiscard]] Vector solve_pressure_mass(const Vector& rhs) const;

    [[nodiscard]] Vec3 velocity_mean(const Vector& u) const;
    [[nodiscard]] double pressure_mean(const Vector& p) const;
    void remove_velocity_mean(Vector& u) const;
    void remove_pressure_mean(Vector& p) const;

    // --- norms ---------------------------------------------------------------
    [[nodiscard]] double velocity_l2_sq(const Vector& u) const;
    [[nodiscard]] double velocity_l2(const Vector& u) const;
    [[nodiscard]] double velocity_grad_l2_sq(const Vector& u) const;
    [[nodiscard]] double velocity_grad_l2(const Vector& u) const;
    [[nodiscard]] double velocity_h1(const Vector& u) const;
    [[nodiscard]] double velocity_lp(const Vector& u, double p) const;
    [[nodiscard]] double velocity_dot_l2(const Vector& u, const Vector& v) const;
    [[nodiscard]] double pressure_l2(const Vector& p) const;

    /// (div u, q) for every pressure basis function q.
    [[nodiscard]] Vector divergence_pairing(const Vector& u) const;
    /// max over q_h of |(div u, q_h)| / ||q_h||_2.
    [[nodiscard]] double divergence_dual_norm(const Vector& u) const;

private:
    void precompute_geometry();
    void assemble_scalar_operators();

    std::shared_ptr<const PeriodicMesh> mesh_;
    TetRule rule_;
    int n_vertices_ = 0;
    int n_scalar_ = 0;
    double volume_ = 0.0;
    std::vector<double> volumes_;
    std::vector<std::array<Vec3, 4>> grad_lambda_;
    std::vector<std::array<double, kLocalVelocity>> shape_;
    std::vector<std::array<double, 4>> bubble_factor_;  // 256 * prod_{j != i} lambda_j

    SpMat mass_s_, stiff_s_, mass_p_;
    std::array<SpMat, 3> div_blocks_;
    Vector int_s_, int_p_;
    Eigen::SimplicialLDLT<SpMat> mass_s_solver_;
    Eigen::SimplicialLDLT<SpMat> mass_p_solver_;
};

// --- measured structural constants -------------------------------------------

/// min over zero-mean q_h of ||pi_h(grad q_h)|| / ||q_h|| via the generalized
/// eigenproblem G^T M^{-1} G q = lambda M_p q. With restrict_to_zero_mean
/// false the constant pressure is admitted and the result is ~0.
[[nodiscard]] double inf_sup_constant(const FESpaces& spaces, bool restrict_to_zero_mean = true);

/// max over v_h of ||v_h||_{H1} / ||v_h||_2 (the inverse-inequality ratio).
[[nodiscard]] double inverse_ratio(const FESpaces& spaces);
/// inverse_ratio * h, bounded for quasi-uniform families.
[[nodiscard]] double inverse_constant(const FESpaces& spaces);

struct CommutatorMeasure {
    double defect = 0.0;  // ||v phi - P_h(v phi)||_{H^l}
    double ratio = 0.0;   // defect / (h^{1+m-l} ||v||_{H^m} ||phi||_{W^{m+1,inf}})
};

/// Commutator defect of v_h with multiplication by phi, P_h = L2 projection
/// onto the MINI space.
[[nodiscard]] CommutatorMeasure commutator_defect(const FESpaces& spaces, const Vector& v,
                                                  const TrigPoly& phi, int l, int m);

/// Pressure analogue: ||q phi - K_h(q phi)||_2 / (h ||q||_2 ||phi||_{W^{1,inf}}).
[[nodiscard]] CommutatorMeasure pressure_commutator_defect(const FESpaces& spaces, const Vector& q,
                                                           const TrigPoly& phi);

/// Worst-case ratios over the whole discrete space (generalized eigenvalue
/// problems), i.e. the smallest admissible constant c for the given phi.
[[nodiscard]] double velocity_commutator_constant(const FESpaces& spaces, const TrigPoly& phi);
[[nodiscard]] double pressure_commutator_constant(const FESpaces& spaces, const TrigPoly& phi);

}  // namespace tns
