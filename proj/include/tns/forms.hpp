// Bilinear operators and the three discrete convective trilinear forms.
#pragma once

#include <string>
#include <vector>

#include "tns/fespace.hpp"

namespace tns {

/// Vector-level operators on the component-blocked velocity layout.
struct AssembledOperators {
    SpMat mass;        // (u, v)
    SpMat stiffness;   // (grad u, grad v)
    SpMat divergence;  // rows: pressure basis, (q, div v)
    Matrix velocity_mean_rows;  // 3 x velocity_dim, integrals per component
    Vector pressure_mean_row;   // integrals of the pressure basis
};

[[nodiscard]] AssembledOperators assemble_operators(const FESpaces& spaces);

enum class ConvectiveCase {
    Symmetrized = 1,         // (u . grad) v + 1/2 v div u
    Rotational = 2,          // (curl u) x v
    RotationalBernoulli = 3  // (curl u) x v + 1/2 grad K_h(u . v)
};

[[nodiscard]] ConvectiveCase convective_case_from_int(int c);
[[nodiscard]] int to_int(ConvectiveCase c);

/// Curl from a velocity gradient with (i, j) = d_j u_i.
[[nodiscard]] inline Vec3 curl_of(const Eigen::Matrix3d& g) {
    return Vec3(g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1));
}

[[nodiscard]] double b_case1(const FESpaces& spaces, const Vector& u, const Vector& v, const Vector& w);
[[nodiscard]] double b_case2(const FESpaces& spaces, const Vector& u, const Vector& v, const Vector& w);
/// b_case2 - 1/2 (K_h(u . v), div w); the gradient term is integrated by parts.
[[nodiscard]] double b_case3(const FESpaces& spaces, const Vector& u, const Vector& v, const Vector& w);

/// K_h(u . v), the zero-mean P1 projection of the pointwise dot product.
[[nodiscard]] Vector bernoulli_projection(const FESpaces& spaces, const Vector& u, const Vector& v);

/// b_h for one of the three cases, plus the linearized operators the time
/// steppers need. Holds a reference to the spaces; pure evaluation.
class ConvectiveForm {
public:
    ConvectiveForm(const FESpaces& spaces, ConvectiveCase which);

    [[nodiscard]] ConvectiveCase which() const { return case_; }
    [[nodiscard]] const FESpaces& spaces() const { return *spaces_; }

    [[nodiscard]] double evaluate(const Vector& u, const Vector& v, const Vector& w) const;

    /// Sparse matrix N(a) with N(a)(i, j) = b_h(a, phi_j, phi_i) for Cases 1 and
    /// 2; for Case 3 only the rotational part (the projected Bernoulli term is
    /// nonlocal, see bernoulli_coupling).
    [[nodiscard]] SpMat frozen_matrix(const Vector& a) const;

    /// Case 3: G(a)(p, j) = (psi_p, a . phi_j); K_h(a . v) = Mp^{-1} G(a) v.
    [[nodiscard]] SpMat bernoulli_coupling(const Vector& a) const;

    /// Vector r with r_i = b_h(a, v, phi_i).
    [[nodiscard]] Vector apply(const Vector& a, const Vector& v) const;

private:
    const FESpaces* spaces_;
    ConvectiveCase case_;
    SpMat divergence_;
};

struct TrilinearSample {
    Vector u, v, w;
};

/// max over samples of |b_h(u,v,w)| / (|grad u| |grad v| |w|^{1/2} |grad w|^{1/2});
/// samples with a vanishing denominator are skipped.
[[nodiscard]] double estimate_constants(const ConvectiveForm& form, const std::vector<TrilinearSample>& samples);

}  // namespace tns
