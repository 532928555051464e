#include "kerrborn/green.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "kerrborn/errors.hpp"

namespace kerrborn {

namespace {
constexpr double kResonanceGuard = 1e-6;
}

struct GreenSolver::Impl {
    Eigen::SparseMatrix<double> S;   // W (Delta_h + k^2 I), symmetric
    Eigen::VectorXd weights;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

namespace {

Eigen::SparseMatrix<double> assemble_interval(const Grid& g, double k) {
    const int n = g.num_nodes();
    const double h = g.h;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    const double k2 = k * k;
    trip.emplace_back(0, 0, -1.0 / h + k2 * h / 2.0);
    trip.emplace_back(0, 1, 1.0 / h);
    for (int i = 1; i < n - 1; ++i) {
        trip.emplace_back(i, i - 1, 1.0 / h);
        trip.emplace_back(i, i, -2.0 / h + k2 * h);
        trip.emplace_back(i, i + 1, 1.0 / h);
    }
    trip.emplace_back(n - 1, n - 2, 1.0 / h);
    trip.emplace_back(n - 1, n - 1, -1.0 / h + k2 * h / 2.0);
    Eigen::SparseMatrix<double> S(n, n);
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

Eigen::SparseMatrix<double> assemble_disk(const Grid& g, double k) {
    const int n = g.num_nodes();
    const int nr = g.n_radial;
    const int na = g.n_angular;
    const double dr = 1.0 / nr;
    const double dtheta = 2.0 * std::numbers::pi / na;
    const double k2 = k * k;
    auto node = [&](int j, int m) {
        if (j == 0) return 0;
        return 1 + (j - 1) * na + ((m % na) + na) % na;
    };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(6 * n);

    // center: conservative flux through the circle of radius dr/2
    const double c_half = (dr / 2.0) * dtheta / dr;
    trip.emplace_back(0, 0, -na * c_half + k2 * g.weights(0));
    for (int m = 0; m < na; ++m) trip.emplace_back(0, node(1, m), c_half);

    for (int j = 1; j <= nr; ++j) {
        const double r = j * dr;
        const bool bnd = (j == nr);
        const double c_minus = (r - dr / 2.0) * dtheta / dr;
        const double c_plus = bnd ? 0.0 : (r + dr / 2.0) * dtheta / dr;
        const double c_ang = (bnd ? dr / 2.0 : dr) / (r * dtheta);
        for (int m = 0; m < na; ++m) {
            const int p = node(j, m);
            trip.emplace_back(p, node(j - 1, m), c_minus);
            if (!bnd) trip.emplace_back(p, node(j + 1, m), c_plus);
            trip.emplace_back(p, node(j, m - 1), c_ang);
            trip.emplace_back(p, node(j, m + 1), c_ang);
            trip.emplace_back(p, p,
                              -(c_minus + c_plus + 2.0 * c_ang) + k2 * g.weights(p));
        }
    }
    Eigen::SparseMatrix<double> S(n, n);
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

/// Smallest-magnitude eigenvalue of the generalized problem S x = lambda W x,
/// i.e. of the collocation operator Delta_h + k^2, by inverse power iteration.
double min_generalized_eigenvalue(const Eigen::SparseMatrix<double>& S,
                                  const Eigen::VectorXd& weights,
                                  const Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu) {
    const int n = static_cast<int>(weights.size());
    std::mt19937_64 rng(0x6b657272u);
    std::normal_distribution<double> dist;
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = dist(rng);
    for (int it = 0; it < 40; ++it) {
        Eigen::VectorXd y = lu.solve(weights.asDiagonal() * x);
        double norm = std::sqrt(y.dot(weights.asDiagonal() * y));
        if (!(norm > 0)) break;
        x = y / norm;
    }
    const double num = x.dot(S * x);
    const double den = x.dot(weights.asDiagonal() * x);
    return num / den;
}

}  // namespace

GreenSolver::GreenSolver(const Grid& grid, double k)
    : grid_(std::make_shared<Grid>(grid)), k_(k), impl_(std::make_unique<Impl>()) {
    if (!(k > 0)) throw DomainError("wavenumber k must be positive");

    if (grid.kind == DomainKind::Interval) {
        // continuum resonances of the interval Neumann problem are k = m*pi
        if (std::abs(std::sin(k)) < kResonanceGuard) {
            const double m = std::round(k / std::numbers::pi);
            std::ostringstream os;
            os << "k=" << k << " is within " << kResonanceGuard
               << " of the Neumann eigenwavenumber " << m << "*pi (eigenvalue "
               << (m * std::numbers::pi) * (m * std::numbers::pi) << ")";
            throw ResonanceError(os.str(), k, std::pow(m * std::numbers::pi, 2));
        }
        impl_->S = assemble_interval(grid, k);
    } else {
        impl_->S = assemble_disk(grid, k);
    }
    impl_->weights = grid.weights;
    impl_->S.makeCompressed();
    impl_->lu.compute(impl_->S);
    if (impl_->lu.info() != Eigen::Success) {
        throw ResonanceError("background operator factorization failed (k^2 is a "
                             "discrete Neumann eigenvalue)", k, k * k);
    }
    const double lambda_min = min_generalized_eigenvalue(impl_->S, impl_->weights, impl_->lu);
    if (std::abs(lambda_min) < kResonanceGuard * k * k) {
        std::ostringstream os;
        os << "k=" << k << " resonates with the discrete Neumann eigenvalue "
           << (k * k - lambda_min) << " of -Laplacian (gap " << lambda_min << ")";
        throw ResonanceError(os.str(), k, k * k - lambda_min);
    }
}

GreenSolver::~GreenSolver() = default;
GreenSolver::GreenSolver(GreenSolver&&) noexcept = default;
GreenSolver& GreenSolver::operator=(GreenSolver&&) noexcept = default;

Eigen::VectorXd GreenSolver::solve_weighted(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != grid_->num_nodes())
        throw ShapeError("right-hand side size does not match grid");
    return impl_->lu.solve(rhs);
}

Eigen::VectorXd GreenSolver::apply_green(const Eigen::VectorXd& v) const {
    if (v.size() != grid_->num_nodes())
        throw ShapeError("node function size does not match grid");
    return impl_->lu.solve((-k_ * k_) * (impl_->weights.asDiagonal() * v));
}

Eigen::VectorXd GreenSolver::apply_operator(const Eigen::VectorXd& u) const {
    if (u.size() != grid_->num_nodes())
        throw ShapeError("node function size does not match grid");
    return impl_->S * u;
}

Eigen::VectorXd GreenSolver::green_column(int node) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(grid_->num_nodes());
    e(node) = 1.0;
    return impl_->lu.solve(e);
}

const Eigen::SparseMatrix<double>& GreenSolver::weighted_operator() const {
    return impl_->S;
}

BackgroundField solve_background(const GreenSolver& solver, const Source& source) {
    const Grid& g = solver.grid();
    const int node = locate_boundary_node(g, source.location);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.num_nodes());
    rhs(node) = -source.scale;  // flux integral of the point source
    BackgroundField f;
    f.u = solver.solve_weighted(rhs);
    f.source = source;
    f.source.k = solver.k();
    f.boundary_trace.resize(g.boundary.size());
    for (size_t b = 0; b < g.boundary.size(); ++b) f.boundary_trace(b) = f.u(g.boundary[b]);
    return f;
}

BackgroundField solve_background(const Grid& grid, double k, const Source& source) {
    GreenSolver solver(grid, k);
    return solve_background(solver, source);
}

double estimate_mu(const GreenSolver& solver, int* rows_used) {
    const Grid& g = solver.grid();
    const int n = g.num_nodes();
    const int max_rows = 1200;
    const int stride = n <= max_rows ? 1 : (n + max_rows - 1) / max_rows;
    double mu = 0.0;
    int used = 0;
    for (int i = 0; i < n; i += stride) {
        // row i of the symmetric Green matrix equals column i
        Eigen::VectorXd col = solver.green_column(i);
        mu = std::max(mu, col.cwiseAbs().dot(g.weights));
        ++used;
    }
    if (rows_used) *rows_used = used;
    return solver.k() * solver.k() * mu;
}

}  // namespace kerrborn
