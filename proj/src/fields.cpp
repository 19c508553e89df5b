#include "tns/fields.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tns {
namespace {

double shifted_cos(int k, int shift, double x) {
    const double a = k * x;
    switch (((shift % 4) + 4) % 4) {
        case 0: return std::cos(a);
        case 1: return std::sin(a);
        case 2: return -std::cos(a);
        default: return -std::sin(a);
    }
}

double eval_term(const TrigTerm& t, const Vec3& x) {
    return t.coef * shifted_cos(t.k[0], t.shift[0], x[0]) * shifted_cos(t.k[1], t.shift[1], x[1]) *
           shifted_cos(t.k[2], t.shift[2], x[2]);
}

TrigTerm differentiate(TrigTerm t, int axis) {
    t.coef *= t.k[axis];
    t.shift[axis] -= 1;
    return t;
}

}  // namespace

TrigPoly TrigPoly::constant(double c) { return TrigPoly({TrigTerm{c, {0, 0, 0}, {0, 0, 0}}}); }

TrigPoly TrigPoly::term(double c, std::array<int, 3> k, const std::array<const char*, 3>& kinds) {
    TrigTerm t{c, k, {0, 0, 0}};
    for (int d = 0; d < 3; ++d) {
        const std::string kind = kinds[d];
        if (kind == "sin") t.shift[d] = 1;
        else if (kind != "cos") throw std::invalid_argument("TrigPoly::term: unknown kind " + kind);
    }
    return TrigPoly({t});
}

double TrigPoly::operator()(const Vec3& x) const {
    double s = 0.0;
    for (const auto& t : terms_) s += eval_term(t, x);
    return s;
}

Vec3 TrigPoly::gradient(const Vec3& x) const {
    Vec3 g = Vec3::Zero();
    for (const auto& t : terms_)
        for (int d = 0; d < 3; ++d) g[d] += eval_term(differentiate(t, d), x);
    return g;
}

double TrigPoly::laplacian(const Vec3& x) const {
    double s = 0.0;
    for (const auto& t : terms_)
        for (int d = 0; d < 3; ++d) s += eval_term(differentiate(differentiate(t, d), d), x);
    return s;
}

TrigPoly TrigPoly::derivative(int axis) const {
    std::vector<TrigTerm> out;
    for (const auto& t : terms_) {
        if (t.k[axis] == 0) continue;
        out.push_back(differentiate(t, axis));
    }
    return TrigPoly(std::move(out));
}

double TrigPoly::w_inf_bound(int order) const {
    double best = 0.0;
    for (int j = 0; j <= order; ++j) {
        double s = 0.0;
        for (const auto& t : terms_) {
            const double kn = std::sqrt(double(t.k[0] * t.k[0] + t.k[1] * t.k[1] + t.k[2] * t.k[2]));
            s += std::abs(t.coef) * std::pow(kn, j);
        }
        best = std::max(best, s);
    }
    return best;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
}

TrigPoly& TrigPoly::operator*=(double s) {
    for (auto& t : terms_) t.coef *= s;
    return *this;
}

TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
TrigPoly operator*(double s, TrigPoly a) { return a *= s; }
TrigPoly operator-(const TrigPoly& a, const TrigPoly& b) { return a + (-1.0) * b; }

Vec3 TrigVectorField::operator()(const Vec3& x) const {
    return Vec3(comp[0](x), comp[1](x), comp[2](x));
}

Eigen::Matrix3d TrigVectorField::gradient(const Vec3& x) const {
    Eigen::Matrix3d g;
    for (int i = 0; i < 3; ++i) g.row(i) = comp[i].gradient(x).transpose();
    return g;
}

TrigVectorField TrigVectorField::curl() const {
    TrigVectorField c;
    c.comp[0] = comp[2].derivative(1) - comp[1].derivative(2);
    c.comp[1] = comp[0].derivative(2) - comp[2].derivative(0);
    c.comp[2] = comp[1].derivative(0) - comp[0].derivative(1);
    return c;
}

TrigPoly TrigVectorField::divergence() const {
    return comp[0].derivative(0) + comp[1].derivative(1) + comp[2].derivative(2);
}

VectorFn TrigVectorField::as_fn() const {
    return [f = *this](const Vec3& x) { return f(x); };
}

TrigVectorField sine_shear() {
    TrigVectorField f;
    f.comp[0] = TrigPoly::term(1.0, {0, 1, 0}, {"cos", "sin", "cos"});
    return f;
}

TrigVectorField tg_like() {
    TrigVectorField f;
    f.comp[0] = TrigPoly::term(1.0, {1, 1, 0}, {"sin", "cos", "cos"});
    f.comp[1] = TrigPoly::term(-1.0, {1, 1, 0}, {"cos", "sin", "cos"});
    return f;
}

TrigVectorField random_trig(std::uint64_t seed, int degree, double amplitude) {
    if (degree < 1) throw std::invalid_argument("random_trig: degree must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_int_distribution<int> wave(0, degree);
    std::uniform_int_distribution<int> kind(0, 1);
    TrigVectorField potential;
    constexpr int kTermsPerComponent = 3;
    for (int c = 0; c < 3; ++c) {
        std::vector<TrigTerm> terms;
        for (int n = 0; n < kTermsPerComponent; ++n) {
            TrigTerm t;
            t.coef = amplitude * coef(rng);
            do {
                for (int d = 0; d < 3; ++d) t.k[d] = wave(rng);
            } while (t.k[0] + t.k[1] + t.k[2] == 0);
            for (int d = 0; d < 3; ++d) t.shift[d] = kind(rng);
            terms.push_back(t);
        }
        potential.comp[c] = TrigPoly(std::move(terms));
    }
    return potential.curl();
}

TrigVectorField datum_preset(const std::string& name, std::uint64_t seed, int degree,
                             double amplitude) {
    if (name == "sine-shear") return sine_shear();
    if (name == "tg-like") return tg_like();
    if (name == "random-trig") return random_trig(seed, degree, amplitude);
    if (name == "zero") return TrigVectorField{};
    throw std::invalid_argument("unknown datum preset: " + name);
}

}  // namespace tns
