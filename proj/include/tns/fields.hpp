// Closed-form trigonometric fields on the torus with analytic derivatives.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tns/mesh.hpp"

namespace tns {

using ScalarFn = std::function<double(const Vec3&)>;
using VectorFn = std::function<Vec3(const Vec3&)>;

/// One product term c * prod_d cos(k_d x_d - s_d pi/2). A shift of 1 turns
/// cos into sin, so differentiation is an exact index shuffle.
struct TrigTerm {
    double coef = 0.0;
    std::array<int, 3> k{0, 0, 0};
    std::array<int, 3> shift{0, 0, 0};
};

class TrigPoly {
public:
    TrigPoly() = default;
    explicit TrigPoly(std::vector<TrigTerm> terms) : terms_(std::move(terms)) {}

    static TrigPoly constant(double c);
    /// c * f_x(kx x) f_y(ky y) f_z(kz z) with f given as "cos" or "sin" per axis.
    static TrigPoly term(double c, std::array<int, 3> k, const std::array<const char*, 3>& kinds);

    [[nodiscard]] double operator()(const Vec3& x) const;
    [[nodiscard]] Vec3 gradient(const Vec3& x) const;
    [[nodiscard]] double laplacian(const Vec3& x) const;
    [[nodiscard]] TrigPoly derivative(int axis) const;

    /// max over orders j <= order of sum |c| |k|^j; an upper bound for the
    /// W^{order,inf} norm.
    [[nodiscard]] double w_inf_bound(int order) const;
    [[nodiscard]] const std::vector<TrigTerm>& terms() const { return terms_; }
    [[nodiscard]] bool empty() const { return terms_.empty(); }

    TrigPoly& operator+=(const TrigPoly& o);
    TrigPoly& operator*=(double s);

private:
    std::vector<TrigTerm> terms_;
};

TrigPoly operator+(TrigPoly a, const TrigPoly& b);
TrigPoly operator*(double s, TrigPoly a);
TrigPoly operator-(const TrigPoly& a, const TrigPoly& b);

struct TrigVectorField {
    std::array<TrigPoly, 3> comp;

    [[nodiscard]] Vec3 operator()(const Vec3& x) const;
    [[nodiscard]] Eigen::Matrix3d gradient(const Vec3& x) const;  // (i, j) = d_j u_i
    [[nodiscard]] TrigVectorField curl() const;
    [[nodiscard]] TrigPoly divergence() const;
    [[nodiscard]] VectorFn as_fn() const;
};

/// (sin y, 0, 0)
[[nodiscard]] TrigVectorField sine_shear();
/// (sin x cos y, -cos x sin y, 0)
[[nodiscard]] TrigVectorField tg_like();
/// Curl of a seeded random vector potential with wavenumbers |k_i| <= degree;
/// analytically divergence-free with zero mean.
[[nodiscard]] TrigVectorField random_trig(std::uint64_t seed, int degree, double amplitude = 1.0);
/// Named presets: "sine-shear", "tg-like", "random-trig", "zero".
[[nodiscard]] TrigVectorField datum_preset(const std::string& name, std::uint64_t seed = 0,
                                           int degree = 2, double amplitude = 1.0);

}  // namespace tns
