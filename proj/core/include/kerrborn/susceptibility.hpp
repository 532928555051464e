#ifndef KERRBORN_SUSCEPTIBILITY_HPP
#define KERRBORN_SUSCEPTIBILITY_HPP

#include <Eigen/Dense>
#include <algorithm>

#include "kerrborn/errors.hpp"
#include "kerrborn/grid.hpp"

namespace kerrborn {

/// Medium pair zeta = (alpha, beta): linear and nonlinear susceptibility as
/// real node functions, supported inside Omega (zero at boundary nodes).
struct Susceptibility {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;

    Susceptibility() = default;
    Susceptibility(Eigen::VectorXd a, Eigen::VectorXd b)
        : alpha(std::move(a)), beta(std::move(b)) {
        if (alpha.size() != beta.size())
            throw ShapeError("alpha and beta must have the same size");
    }

    static Susceptibility zero(int n) {
        return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    }

    int size() const { return static_cast<int>(alpha.size()); }

    double sup_norm() const {
        if (alpha.size() == 0) return 0.0;
        return std::max(alpha.cwiseAbs().maxCoeff(), beta.cwiseAbs().maxCoeff());
    }

    /// Zeroes boundary entries, enforcing the interior-support invariant.
    void clamp_to_interior(const Grid& grid) {
        for (int b : grid.boundary) {
            alpha(b) = 0.0;
            beta(b) = 0.0;
        }
    }

    Susceptibility operator+(const Susceptibility& o) const {
        return {alpha + o.alpha, beta + o.beta};
    }
    Susceptibility operator*(double c) const { return {c * alpha, c * beta}; }
};

inline Susceptibility operator*(double c, const Susceptibility& z) { return z * c; }

}  // namespace kerrborn

#endif
