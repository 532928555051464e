#include "kerrborn/inversion.hpp"

#include <algorithm>
#include <cmath>

#include "kerrborn/errors.hpp"

namespace kerrborn {

ForwardContext::ForwardContext(Grid grid, std::vector<Source> sources)
    : grid_(std::move(grid)), sources_(std::move(sources)) {
    if (sources_.empty()) throw ConfigError("ForwardContext: at least one source required");
    for (const Source& s : sources_) {
        auto it = solvers_.find(s.k);
        if (it == solvers_.end())
            it = solvers_.emplace(s.k, std::make_shared<GreenSolver>(grid_, s.k)).first;
        per_source_.push_back(it->second);
        fields_.push_back(solve_background(*it->second, s));
    }
}

const GreenSolver& ForwardContext::solver_for_k(double k) const {
    auto it = solvers_.find(k);
    if (it == solvers_.end()) throw ConfigError("no solver for wavenumber");
    return *it->second;
}

double ScatteringData::data_norm() const {
    if (phi.size() == 0) return 0.0;
    return std::sqrt(phi.squaredNorm() / static_cast<double>(phi.size()));
}

Eigen::VectorXd ScatteringData::stacked() const {
    Eigen::VectorXd v(phi.size());
    for (int s = 0; s < phi.rows(); ++s)
        for (int r = 0; r < phi.cols(); ++r) v(s * phi.cols() + r) = phi(s, r);
    return v;
}

UnknownLayout UnknownLayout::all_interior(const Grid& grid, bool alpha, bool beta) {
    UnknownLayout l;
    l.solve_alpha = alpha;
    l.solve_beta = beta;
    l.cells = grid.interior;
    return l;
}

Susceptibility UnknownLayout::embed(const Grid& grid, const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != num_columns())
        throw ShapeError("UnknownLayout::embed: coefficient count mismatch");
    Susceptibility z = Susceptibility::zero(grid.num_nodes());
    int offset = 0;
    if (solve_alpha) {
        for (size_t j = 0; j < cells.size(); ++j) z.alpha(cells[j]) = coeffs(offset + j);
        offset += static_cast<int>(cells.size());
    }
    if (solve_beta) {
        for (size_t j = 0; j < cells.size(); ++j) z.beta(cells[j]) = coeffs(offset + j);
    }
    return z;
}

Eigen::VectorXd UnknownLayout::extract(const Susceptibility& zeta) const {
    Eigen::VectorXd v(num_columns());
    int offset = 0;
    if (solve_alpha) {
        for (size_t j = 0; j < cells.size(); ++j) v(offset + j) = zeta.alpha(cells[j]);
        offset += static_cast<int>(cells.size());
    }
    if (solve_beta) {
        for (size_t j = 0; j < cells.size(); ++j) v(offset + j) = zeta.beta(cells[j]);
    }
    return v;
}

LinearizedMap assemble_K1(const ForwardContext& ctx, const UnknownLayout& layout) {
    const Grid& grid = ctx.grid();
    const int S = ctx.num_sources();
    const int R = ctx.num_receivers();
    const int C = static_cast<int>(layout.cells.size());
    if (C == 0) throw ConfigError("assemble_K1: empty unknown layout");

    LinearizedMap map;
    map.layout = layout;
    map.num_sources = S;
    map.num_receivers = R;
    map.matrix.resize(S * R, layout.num_columns());

    // boundary rows of the Green matrix per frequency (G is symmetric,
    // so the receiver row equals the receiver column)
    std::map<double, Eigen::MatrixXd> boundary_green;
    for (const Source& s : ctx.sources()) {
        if (boundary_green.count(s.k)) continue;
        const GreenSolver& solver = ctx.solver_for_k(s.k);
        Eigen::MatrixXd gb(R, grid.num_nodes());
        for (int r = 0; r < R; ++r) gb.row(r) = solver.green_column(grid.boundary[r]).transpose();
        boundary_green.emplace(s.k, std::move(gb));
    }

    for (int s = 0; s < S; ++s) {
        const Source& src = ctx.sources()[s];
        const Eigen::MatrixXd& gb = boundary_green.at(src.k);
        const Eigen::VectorXd& u0 = ctx.field(s).u;
        const double k2 = src.k * src.k;
        for (int j = 0; j < C; ++j) {
            const int node = layout.cells[j];
            const double w = grid.weights(node);
            int offset = 0;
            if (layout.solve_alpha) {
                map.matrix.block(s * R, j, R, 1) = (-k2 * w * u0(node)) * gb.col(node);
                offset += C;
            }
            if (layout.solve_beta) {
                map.matrix.block(s * R, offset + j, R, 1) =
                    (-k2 * w * std::pow(u0(node), 3)) * gb.col(node);
            }
        }
    }
    return map;
}

RegularizedPseudoinverse::RegularizedPseudoinverse(const Eigen::MatrixXd& matrix, double tau)
    : tau_(tau) {
    if (!(tau > 0.0) || !(tau < 1.0))
        throw DomainError("build_pinv: tau must lie in (0, 1)");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u_ = svd.matrixU();
    v_ = svd.matrixV();
    sigma_ = svd.singularValues();
    const double sigma_max = sigma_.size() ? sigma_(0) : 0.0;
    if (!(sigma_max > 0)) throw DomainError("build_pinv: matrix is zero");
    rank_ = 0;
    while (rank_ < sigma_.size() && sigma_(rank_) >= tau * sigma_max) ++rank_;
    norm_ = 1.0 / sigma_(rank_ - 1);
}

Eigen::VectorXd RegularizedPseudoinverse::apply(const Eigen::VectorXd& data) const {
    if (data.size() != u_.rows()) throw ShapeError("pseudoinverse: data size mismatch");
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(v_.rows());
    for (int i = 0; i < rank_; ++i)
        coeffs += (u_.col(i).dot(data) / sigma_(i)) * v_.col(i);
    return coeffs;
}

RegularizedPseudoinverse build_pinv(const LinearizedMap& map, double tau) {
    return RegularizedPseudoinverse(map.matrix, tau);
}

std::vector<std::vector<int>> enumerate_compositions(int m, int min_parts) {
    std::vector<std::vector<int>> out;
    std::vector<int> current;
    // parts >= 1 in each slot; depth-first in slot order
    auto recurse = [&](auto&& self, int remaining) -> void {
        if (remaining == 0) {
            if (static_cast<int>(current.size()) >= min_parts) out.push_back(current);
            return;
        }
        for (int part = 1; part <= remaining; ++part) {
            current.push_back(part);
            self(self, remaining - part);
            current.pop_back();
        }
    };
    recurse(recurse, m);
    // group by part count, then lexicographic
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    return out;
}

std::vector<Susceptibility> inverse_terms(const ScatteringData& phi, int M,
                                          const RegularizedPseudoinverse& pinv,
                                          const LinearizedMap& map,
                                          const ForwardContext& ctx,
                                          int max_order_guard) {
    if (M < 1) throw DomainError("inverse_terms: M must be >= 1");
    if (M > max_order_guard)
        throw ConfigError("inverse_terms: order " + std::to_string(M) +
                          " exceeds the composition enumeration guard (" +
                          std::to_string(max_order_guard) + ")");
    if (phi.phi.rows() != map.num_sources || phi.phi.cols() != map.num_receivers)
        throw ShapeError("inverse_terms: data shape does not match the linearized map");

    const Grid& grid = ctx.grid();
    const int S = ctx.num_sources();
    const int R = ctx.num_receivers();

    std::vector<Susceptibility> terms;
    terms.reserve(M);
    terms.push_back(map.layout.embed(grid, pinv.apply(phi.stacked())));

    for (int m = 2; m <= M; ++m) {
        Eigen::VectorXd data = Eigen::VectorXd::Zero(S * R);
        for (const std::vector<int>& comp : enumerate_compositions(m)) {
            const int n = static_cast<int>(comp.size());
            std::vector<Susceptibility> pool;
            pool.reserve(n);
            for (int part : comp) pool.push_back(terms[part - 1]);
            for (int s = 0; s < S; ++s) {
                const Eigen::VectorXd field = compute_K(
                    n, std::span<const Susceptibility>(pool.data(), pool.size()),
                    ctx.field(s), ctx.solver(s));
                for (int r = 0; r < R; ++r) data(s * R + r) += field(grid.boundary[r]);
            }
        }
        terms.push_back(map.layout.embed(grid, -pinv.apply(data)));
    }
    return terms;
}

ReconstructionResult reconstruct(const ScatteringData& phi, int M,
                                 const RegularizedPseudoinverse& pinv,
                                 const LinearizedMap& map, const ForwardContext& ctx,
                                 double radius) {
    ReconstructionResult res;
    res.terms = inverse_terms(phi, M, pinv, map, ctx);
    res.zeta = Susceptibility::zero(ctx.grid().num_nodes());
    for (const Susceptibility& t : res.terms) {
        res.zeta = res.zeta + t;
        res.term_norms.push_back(t.sup_norm());
    }
    res.k1phi_norm = res.terms.front().sup_norm();
    res.radius = radius;
    res.radius_warning = !(res.k1phi_norm < radius);
    res.data_norm = phi.data_norm();
    return res;
}

}  // namespace kerrborn
