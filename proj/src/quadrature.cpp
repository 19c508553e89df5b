#include "tns/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace tns {

void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_jacobi: n must be positive");
    const double ab = alpha + beta;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        J(k, k) = (k == 0) ? (beta - alpha) / (ab + 2.0)
                           : (beta * beta - alpha * alpha) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double m = k + 1.0;
            const double t = 2.0 * m + ab;
            const double b = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) /
                             (t * t * (t + 1.0) * (t - 1.0));
            J(k, k + 1) = J(k + 1, k) = std::sqrt(b);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) *
                       std::tgamma(beta + 1.0) / std::tgamma(ab + 2.0);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = mu0 * v0 * v0;
    }
}

TetRule conical_tet_rule(int q) {
    std::vector<double> t0, w0, t1, w1, t2, w2;
    gauss_jacobi(q, 2.0, 0.0, t0, w0);
    gauss_jacobi(q, 1.0, 0.0, t1, w1);
    gauss_jacobi(q, 0.0, 0.0, t2, w2);

    TetRule rule;
    rule.degree = 2 * q - 1;
    double total = 0.0;
    for (int i = 0; i < q; ++i) {
        const double u = 0.5 * (1.0 + t0[i]);
        const double wu = w0[i] / 8.0;
        for (int j = 0; j < q; ++j) {
            const double v = 0.5 * (1.0 + t1[j]);
            const double wv = w1[j] / 4.0;
            for (int k = 0; k < q; ++k) {
                const double w = 0.5 * (1.0 + t2[k]);
                const double ww = w2[k] / 2.0;
                const double x = u;
                const double y = v * (1.0 - u);
                const double z = w * (1.0 - u) * (1.0 - v);
                rule.bary.push_back({1.0 - x - y - z, x, y, z});
                rule.weights.push_back(wu * wv * ww);
                total += wu * wv * ww;
            }
        }
    }
    for (auto& w : rule.weights) w /= total;
    return rule;
}

const TetRule& default_tet_rule() {
    static const TetRule rule = conical_tet_rule(6);
    return rule;
}

LineRule gauss_legendre_unit(int n) {
    std::vector<double> t, w;
    gauss_jacobi(n, 0.0, 0.0, t, w);
    LineRule rule;
    for (int k = 0; k < n; ++k) {
        rule.points.push_back(0.5 * (1.0 + t[k]));
        rule.weights.push_back(0.5 * w[k]);
    }
    return rule;
}

}  // namespace tns
