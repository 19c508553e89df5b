#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "tns/fields.hpp"
#include "tns/forms.hpp"
#include "tns/linsolve.hpp"

using namespace tns;

namespace {

const double kQuarterVol = std::pow(2.0 * M_PI, 3) / 4.0;

struct Level {
    std::shared_ptr<const PeriodicMesh> mesh;
    FESpaces spaces;
    AssembledOperators ops;
    oracle::Evaluator ev;
    explicit Level(int n)
        : mesh(std::make_shared<const PeriodicMesh>(build_torus_mesh(n))),
          spaces(mesh),
          ops(assemble_operators(spaces)),
          ev(*mesh) {}
    Vector proj(const VectorFn& f) const { return spaces.project_velocity(f); }
};

Vec3 sin_y(const Vec3& x) { return Vec3(std::sin(x.y()), 0, 0); }
Vec3 sin_x_y(const Vec3& x) { return Vec3(0, std::sin(x.x()), 0); }
Vec3 cosx_siny_y(const Vec3& x) { return Vec3(0, std::cos(x.x()) * std::sin(x.y()), 0); }
Vec3 cosy_sinx_x(const Vec3& x) { return Vec3(std::cos(x.y()) * std::sin(x.x()), 0, 0); }

double oracle_case1(const Level& L, const Vector& u, const Vector& v, const Vector& w) {
    return L.ev.integrate([&](std::size_t e, const auto& l, const Vec3&) {
        const Vec3 uu = L.ev.velocity(u, e, l), vv = L.ev.velocity(v, e, l), ww = L.ev.velocity(w, e, l);
        const Eigen::Matrix3d gu = L.ev.gradient(u, e, l), gv = L.ev.gradient(v, e, l);
        return (gv * uu + 0.5 * gu.trace() * vv).dot(ww);
    });
}

double oracle_case2(const Level& L, const Vector& u, const Vector& v, const Vector& w) {
    return L.ev.integrate([&](std::size_t e, const auto& l, const Vec3&) {
        const Eigen::Matrix3d g = L.ev.gradient(u, e, l);
        const Vec3 curl(g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1));
        return curl.cross(L.ev.velocity(v, e, l)).dot(L.ev.velocity(w, e, l));
    });
}

}  // namespace

TEST_CASE("mass quadratic form and stiffness kernel") {
    Level L(2);
    const Vector u = Vector::Random(L.spaces.velocity_dim());
    CHECK(u.dot(L.ops.mass * u) == doctest::Approx(L.ev.l2_sq(u)).epsilon(1e-12));
    CHECK(u.dot(L.ops.stiffness * u) == doctest::Approx(L.ev.grad_sq(u)).epsilon(1e-12));
    Vector c = Vector::Zero(L.spaces.velocity_dim());
    const int ns = L.spaces.scalar_dim();
    const int nv = L.spaces.pressure_dim();
    for (int comp = 0; comp < 3; ++comp) c.segment(comp * ns, nv).setConstant(comp + 1.0);
    CHECK((L.ops.stiffness * c).norm() < 1e-12);
}

TEST_CASE("divergence pairing of a solenoidal field decays under refinement") {
    double prev = 1e300;
    for (int n : {2, 3, 4}) {
        Level L(n);
        const Vector u = L.proj(sin_y);
        const double r = (L.ops.divergence * u).norm();
        CHECK(r < prev);
        prev = r;
        CHECK((L.ops.divergence * u - L.spaces.divergence_pairing(u)).norm() < 1e-12);
    }
}

TEST_CASE("skew symmetry in the last two arguments") {
    Level L(3);
    for (int i = 0; i < 5; ++i) {
        const Vector u = L.proj(random_trig(10 + i, 2).as_fn());
        const Vector v = L.proj(random_trig(20 + i, 2).as_fn());
        const double scale = L.spaces.velocity_h1(u) * std::pow(L.spaces.velocity_h1(v), 2);
        CHECK(std::abs(b_case1(L.spaces, u, v, v)) <= 1e-12 * scale);
        CHECK(std::abs(b_case2(L.spaces, u, v, v)) <= 1e-12 * scale);
        const Vector vd = project_divergence_free(L.spaces, L.ops, v);
        const double scale3 = L.spaces.velocity_h1(u) * std::pow(L.spaces.velocity_h1(vd), 2);
        CHECK(std::abs(b_case3(L.spaces, u, vd, vd)) <= 1e-12 * scale3);
        // Case 3 is not skew off V_h.
        CHECK(std::abs(b_case3(L.spaces, u, v, v)) > 1e-8 * scale);
    }
}

TEST_CASE("case 1 matches the oracle and tends to a quarter of the volume") {
    // n = 2 is degenerate here: sin x vanishes at every vertex.
    double prev_err = 1e300;
    for (int n : {3, 4, 6}) {
        Level L(n);
        const Vector u = L.proj(sin_y), v = L.proj(sin_x_y), w = L.proj(cosx_siny_y);
        const double b = b_case1(L.spaces, u, v, w);
        CHECK(b == doctest::Approx(oracle_case1(L, u, v, w)).epsilon(1e-12));
        const double err = std::abs(b - kQuarterVol);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 0.02 * kQuarterVol);
}

TEST_CASE("case 2 matches the oracle and tends to plus a quarter of the volume") {
    double prev_err = 1e300;
    for (int n : {3, 4, 6}) {
        Level L(n);
        const Vector u = L.proj(sin_y), v = L.proj(sin_x_y), w = L.proj(cosy_sinx_x);
        const double b = b_case2(L.spaces, u, v, w);
        CHECK(b == doctest::Approx(oracle_case2(L, u, v, w)).epsilon(1e-12));
        CHECK(b > 0.0);
        const double err = std::abs(b - kQuarterVol);
        CHECK(err < prev_err);
        prev_err = err;
    }
}

TEST_CASE("case 3 minus case 2 is the projected Bernoulli gradient") {
    Level L(3);
    const Vector u = L.proj(sin_y);
    const Vector w = L.proj([](const Vec3& x) { return Vec3(0, std::sin(2 * x.y()), 0); });
    const Vector k = L.spaces.project_pressure(ScalarSampler([&](std::size_t e, std::size_t q, const Vec3&) {
        return L.spaces.velocity_value(u, e, q).squaredNorm();
    }));
    const double grad_term = L.ev.integrate([&](std::size_t e, const auto& l, const Vec3&) {
        const auto g = oracle::geometry(*L.mesh, e);
        const auto& t = L.mesh->tets[e];
        Vec3 gk = Vec3::Zero();
        for (int a = 0; a < 4; ++a) gk += k[t[a]] * g.grad[a];
        return 0.5 * gk.dot(L.ev.velocity(w, e, l));
    });
    const double diff = b_case3(L.spaces, u, u, w) - b_case2(L.spaces, u, u, w);
    CHECK(std::abs(grad_term) > 1e-3);
    CHECK(diff == doctest::Approx(grad_term).epsilon(1e-10));
    CHECK((bernoulli_projection(L.spaces, u, u) - k).norm() < 1e-10 * k.norm());
}

TEST_CASE("frozen matrix, apply and evaluate agree and are trilinear") {
    Level L(2);
    const int nd = L.spaces.velocity_dim();
    const Vector a = Vector::Random(nd), b = Vector::Random(nd), v = Vector::Random(nd), w = Vector::Random(nd);
    for (int c = 1; c <= 3; ++c) {
        const ConvectiveForm form(L.spaces, convective_case_from_int(c));
        const double val = form.evaluate(a, v, w);
        CHECK(w.dot(form.apply(a, v)) == doctest::Approx(val).epsilon(1e-11));
        if (c < 3) {
            CHECK(w.dot(form.frozen_matrix(a) * v) == doctest::Approx(val).epsilon(1e-11));
        } else {
            const SpMat G = form.bernoulli_coupling(a);
            const Vector kav = L.spaces.solve_pressure_mass(G * v);
            Vector kmean = kav;
            L.spaces.remove_pressure_mean(kmean);
            const double rot = w.dot(form.frozen_matrix(a) * v);
            const double grad = -0.5 * kmean.dot(L.ops.divergence * w);
            CHECK(rot + grad == doctest::Approx(val).epsilon(1e-10));
        }
        const double lin = form.evaluate(2.5 * a - b, v, w);
        CHECK(lin == doctest::Approx(2.5 * val - form.evaluate(b, v, w)).epsilon(1e-11));
        CHECK(form.evaluate(a, v + b, w) ==
              doctest::Approx(val + form.evaluate(a, b, w)).epsilon(1e-11));
    }
    CHECK(b_case1(L.spaces, a, v, w) == doctest::Approx(oracle_case1(L, a, v, w)).epsilon(1e-11));
}

TEST_CASE("trilinear constant estimates") {
    Level L(2);
    std::vector<TrilinearSample> same, mixed;
    for (int i = 0; i < 4; ++i) {
        const Vector u = L.proj(random_trig(40 + i, 2).as_fn()), v = L.proj(random_trig(50 + i, 2).as_fn());
        same.push_back({u, v, v});
        mixed.push_back({u, v, L.proj(random_trig(60 + i, 2).as_fn())});
    }
    const ConvectiveForm f1(L.spaces, ConvectiveCase::Symmetrized), f2(L.spaces, ConvectiveCase::Rotational);
    CHECK(estimate_constants(f1, same) < 1e-12);
    const double c1 = estimate_constants(f1, mixed), c2 = estimate_constants(f2, mixed);
    CHECK(std::isfinite(c1));
    CHECK(std::isfinite(c2));
    CHECK(c1 > 0.0);
    CHECK(convective_case_from_int(2) == ConvectiveCase::Rotational);
    CHECK_THROWS((void)convective_case_from_int(4));
}
