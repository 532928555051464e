#ifndef KERRBORN_TEST_HELPERS_HPP
#define KERRBORN_TEST_HELPERS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "kerrborn/green.hpp"
#include "kerrborn/grid.hpp"
#include "kerrborn/susceptibility.hpp"

namespace kbt {

/// Analytic Neumann Helmholtz Green kernel on [0,1]:
/// G(x,y) = cos(k x_<) cos(k (1 - x_>)) / (k sin k).
inline double interval_kernel(double k, double x, double y) {
    const double lo = std::min(x, y), hi = std::max(x, y);
    return std::cos(k * lo) * std::cos(k * (1.0 - hi)) / (k * std::sin(k));
}

/// Trapezoid quadrature of -k^2 G(x_i, .) v against the analytic kernel.
inline Eigen::VectorXd analytic_green_apply(const kerrborn::Grid& g, double k,
                                            const Eigen::VectorXd& v) {
    const int n = g.num_nodes();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        double q = 0.0;
        for (int j = 0; j < n; ++j)
            q += g.weights(j) * interval_kernel(k, g.nodes(i, 0), g.nodes(j, 0)) * v(j);
        out(i) = -k * k * q;
    }
    return out;
}

inline Eigen::VectorXd random_vector(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

/// Random interior-supported medium with sup norm `amp`.
inline kerrborn::Susceptibility random_medium(const kerrborn::Grid& g, double amp,
                                              unsigned seed) {
    kerrborn::Susceptibility z(random_vector(g.num_nodes(), seed),
                               random_vector(g.num_nodes(), seed + 1));
    z.clamp_to_interior(g);
    const double s = z.sup_norm();
    if (s > 0) z = z * (amp / s);
    return z;
}

inline double sup_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace kbt

#endif
