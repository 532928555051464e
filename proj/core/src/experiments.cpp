#include "kerrborn/experiments.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "kerrborn/errors.hpp"
#include "kerrborn/io.hpp"

namespace kerrborn {

using nlohmann::json;

std::string to_string(UnknownSelection sel) {
    switch (sel) {
        case UnknownSelection::Both: return "both";
        case UnknownSelection::AlphaOnly: return "alpha-only";
        default: return "beta-only";
    }
}

UnknownSelection unknown_selection_from_string(const std::string& name) {
    if (name == "both") return UnknownSelection::Both;
    if (name == "alpha-only") return UnknownSelection::AlphaOnly;
    if (name == "beta-only") return UnknownSelection::BetaOnly;
    throw ConfigError("unknown selection: " + name);
}

std::string to_string(MediumKind kind) {
    switch (kind) {
        case MediumKind::Gaussian1D: return "gaussian1d";
        case MediumKind::Disk: return "disk";
        case MediumKind::Gaussian2D: return "gaussian2d";
        default: return "single-cell";
    }
}

MediumKind medium_kind_from_string(const std::string& name) {
    if (name == "gaussian1d") return MediumKind::Gaussian1D;
    if (name == "disk") return MediumKind::Disk;
    if (name == "gaussian2d") return MediumKind::Gaussian2D;
    if (name == "single-cell") return MediumKind::SingleCell;
    throw ConfigError("unknown medium kind: " + name);
}

void Scenario::validate() const {
    if (synthesis_resolution < 8 || inversion_resolution < 8)
        throw ConfigError("scenario: resolutions must be >= 8");
    if (synthesis_resolution < 1.5 * inversion_resolution)
        throw ConfigError("scenario: synthesis resolution must be >= 1.5x the inversion "
                          "resolution (anti-inverse-crime rule)");
    if (!(contrast >= 0)) throw ConfigError("scenario: contrast must be >= 0");
    if (order < 1) throw ConfigError("scenario: inverse-series order M must be >= 1");
    if (!(tau > 0 && tau < 1)) throw ConfigError("scenario: tau must lie in (0,1)");
    if (!(noise >= 0)) throw ConfigError("scenario: noise level must be >= 0");
    if (sources.empty()) throw ConfigError("scenario: needs at least one source");
    if (!std::isfinite(medium.amplitude) || !std::isfinite(medium.eps))
        throw ConfigError("scenario: medium parameters must be finite");
    for (const Source& s : sources)
        if (!(s.k > 0) || !std::isfinite(s.scale))
            throw ConfigError("scenario: invalid source");
}

Scenario scenario_1d_paper() {
    Scenario sc;
    sc.name = "interval-gaussian-scaled-sources";
    sc.domain = DomainKind::Interval;
    sc.medium.kind = MediumKind::Gaussian1D;
    sc.medium.amplitude = 0.2;
    sc.medium.eps = 0.01;
    sc.medium.center_x = 0.5;
    sc.medium.support_lo = 0.4;
    sc.medium.support_hi = 0.6;
    sc.mask = UnknownSelection::Both;
    // 12 geometric scales per side, three frequencies
    for (double side : {0.0, 1.0})
        for (int j = 0; j < 12; ++j)
            for (double k : {0.9, 1.0, 1.1})
                sc.sources.push_back({side, 0.25 * std::pow(1.25, j), k});
    sc.synthesis_resolution = 129;
    sc.inversion_resolution = 65;
    sc.order = 4;
    sc.tau = 1e-3;
    sc.restrict_support = true;
    return sc;
}

Scenario scenario_2d(double contrast, MediumKind medium, UnknownSelection selection) {
    if (!(contrast > 0)) throw ConfigError("scenario_2d: contrast must be positive");
    if (medium != MediumKind::Disk && medium != MediumKind::Gaussian2D)
        throw ConfigError("scenario_2d: medium must be disk or gaussian2d");
    Scenario sc;
    sc.name = "disk-" + to_string(medium) + "-" + to_string(selection);
    sc.domain = DomainKind::Disk;
    sc.medium.kind = medium;
    if (medium == MediumKind::Disk) {
        sc.medium.amplitude = 1.0;
        sc.medium.center_x = 0.3;
        sc.medium.center_y = 0.0;
        sc.medium.radius_sq = 0.2;
    } else {
        sc.medium.amplitude = 2.0;
        sc.medium.eps = 0.04;
        sc.medium.center_x = -0.3;
        sc.medium.center_y = 0.3;
    }
    sc.contrast = contrast;
    sc.mask = selection;
    for (int j = 0; j < 16; ++j)
        sc.sources.push_back({2.0 * std::numbers::pi * j / 16.0, 1.0, 1.0});
    sc.synthesis_resolution = 24;
    sc.inversion_resolution = 16;
    sc.order = 2;
    sc.tau = 1e-3;
    return sc;
}

namespace {

double medium_value(const Scenario& sc, double x, double y, double inv_h) {
    const MediumSpec& m = sc.medium;
    switch (m.kind) {
        case MediumKind::Gaussian1D: {
            if (x < m.support_lo || x > m.support_hi) return 0.0;
            const double d = x - m.center_x;
            return m.amplitude / std::sqrt(2.0 * std::numbers::pi * m.eps) *
                   std::exp(-d * d / (2.0 * m.eps));
        }
        case MediumKind::Disk: {
            const double dx = x - m.center_x, dy = y - m.center_y;
            return (dx * dx + dy * dy <= m.radius_sq) ? m.amplitude : 0.0;
        }
        case MediumKind::Gaussian2D: {
            const double dx = x - m.center_x, dy = y - m.center_y;
            return m.amplitude / std::sqrt(2.0 * std::numbers::pi * m.eps) *
                   std::exp(-(dx * dx + dy * dy) / (2.0 * m.eps));
        }
        case MediumKind::SingleCell: {
            const double w = m.cell_width > 0 ? m.cell_width : inv_h;
            return m.amplitude * std::max(0.0, 1.0 - std::abs(x - m.center_x) / w);
        }
    }
    return 0.0;
}

void run_over_sources(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Linear periodic interpolation of a boundary trace between two boundary
/// node sets (identity on the interval's two endpoints).
Eigen::VectorXd interp_boundary_trace(const Grid& from, const Eigen::VectorXd& trace,
                                      const Grid& to) {
    if (from.kind == DomainKind::Interval) return trace;
    const int nf = from.n_angular;
    const int nt = to.n_angular;
    Eigen::VectorXd out(nt);
    for (int m = 0; m < nt; ++m) {
        const double pos = static_cast<double>(m) * nf / nt;
        const int i0 = static_cast<int>(std::floor(pos)) % nf;
        const int i1 = (i0 + 1) % nf;
        const double frac = pos - std::floor(pos);
        out(m) = (1.0 - frac) * trace(i0) + frac * trace(i1);
    }
    return out;
}

}  // namespace

UnknownLayout scenario_layout(const Scenario& scenario, const Grid& grid) {
    UnknownLayout layout = UnknownLayout::all_interior(
        grid, scenario.mask != UnknownSelection::BetaOnly,
        scenario.mask != UnknownSelection::AlphaOnly);
    if (!scenario.restrict_support) return layout;

    const MediumSpec& m = scenario.medium;
    std::vector<int> kept;
    if (m.kind == MediumKind::SingleCell) {
        // a single unknown cell: the interior node nearest the tent center
        int best = layout.cells.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (int c : layout.cells) {
            const double d = std::abs(grid.nodes(c, 0) - m.center_x);
            if (d < best_d) { best_d = d; best = c; }
        }
        kept.push_back(best);
    } else {
        for (int c : layout.cells) {
            const double x = grid.nodes(c, 0);
            const double y = grid.dimension > 1 ? grid.nodes(c, 1) : 0.0;
            const double dx = x - m.center_x, dy = y - m.center_y;
            bool inside = false;
            switch (m.kind) {
                case MediumKind::Gaussian1D:
                    inside = x >= m.support_lo - 1e-12 && x <= m.support_hi + 1e-12;
                    break;
                case MediumKind::Disk:
                    inside = dx * dx + dy * dy <= m.radius_sq + 1e-12;
                    break;
                case MediumKind::Gaussian2D:
                    inside = dx * dx + dy * dy <= 9.0 * m.eps;  // 3 sigma
                    break;
                default: break;
            }
            if (inside) kept.push_back(c);
        }
    }
    if (kept.empty()) throw ConfigError("scenario: support restriction leaves no unknowns");
    layout.cells = std::move(kept);
    return layout;
}

Susceptibility sample_medium(const Scenario& scenario, const Grid& grid) {
    const double inv_h = 1.0 / (scenario.inversion_resolution - 1);
    Susceptibility z = Susceptibility::zero(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const double x = grid.nodes(i, 0);
        const double y = grid.dimension > 1 ? grid.nodes(i, 1) : 0.0;
        const double v = scenario.contrast * medium_value(scenario, x, y, inv_h);
        if (scenario.mask != UnknownSelection::BetaOnly) z.alpha(i) = v;
        if (scenario.mask != UnknownSelection::AlphaOnly) z.beta(i) = v;
    }
    z.clamp_to_interior(grid);
    return z;
}

namespace {

Eigen::VectorXd newton_attempt(const GreenSolver& solver, const Susceptibility& z,
                               const Eigen::VectorXd& rhs, Eigen::VectorXd u, bool& ok) {
    const Grid& g = solver.grid();
    const double k2 = solver.k() * solver.k();
    const Eigen::VectorXd& w = g.weights;
    auto residual = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return solver.apply_operator(v) +
               k2 * w.cwiseProduct(z.alpha.cwiseProduct(v) +
                                   z.beta.cwiseProduct(v.array().cube().matrix())) -
               rhs;
    };
    ok = false;
    Eigen::VectorXd F = residual(u);
    for (int it = 0; it < 40; ++it) {
        Eigen::SparseMatrix<double> J = solver.weighted_operator();
        Eigen::VectorXd diag =
            k2 * w.cwiseProduct(z.alpha + 3.0 * z.beta.cwiseProduct(u.cwiseAbs2()));
        for (int i = 0; i < diag.size(); ++i) J.coeffRef(i, i) += diag(i);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
        if (lu.info() != Eigen::Success) return u;
        Eigen::VectorXd delta = lu.solve(-F);
        // backtracking line search on ||F||
        double t = 1.0;
        const double f0 = F.norm();
        Eigen::VectorXd u_next, F_next;
        while (t >= 1.0 / 1024.0) {
            u_next = u + t * delta;
            F_next = residual(u_next);
            if (std::isfinite(F_next.norm()) && F_next.norm() <= (1.0 - 0.25 * t) * f0) break;
            t /= 2.0;
        }
        if (t < 1.0 / 1024.0) return u;  // stalled
        u = std::move(u_next);
        F = std::move(F_next);
        const double step = t * delta.cwiseAbs().maxCoeff();
        if (step <= 1e-13 * std::max(1.0, u.cwiseAbs().maxCoeff())) {
            ok = true;
            return u;
        }
    }
    ok = F.norm() <= 1e-10 * std::max(1.0, rhs.norm());
    return u;
}

}  // namespace

Eigen::VectorXd solve_nonlinear(const GreenSolver& solver, const Susceptibility& zeta,
                                const BackgroundField& u0) {
    const Eigen::VectorXd rhs = solver.apply_operator(u0.u);
    bool ok = false;
    Eigen::VectorXd u = newton_attempt(solver, zeta, rhs, u0.u, ok);
    if (ok) return u;
    // contrast continuation, warm-started
    u = u0.u;
    for (double lambda : {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0}) {
        u = newton_attempt(solver, zeta * lambda, rhs, u, ok);
        if (!ok)
            throw NonConvergenceError(
                "nonlinear solve failed at continuation level " + std::to_string(lambda), {});
    }
    return u;
}

ScatteringData synthesize(const Scenario& scenario, SynthesisReport* report, int threads) {
    scenario.validate();
    const Grid synth_grid = build_grid(scenario.domain, scenario.synthesis_resolution);
    const Grid inv_grid = build_grid(scenario.domain, scenario.inversion_resolution);
    ForwardContext ctx(synth_grid, scenario.sources);
    const Susceptibility truth = sample_medium(scenario, synth_grid);

    const int S = ctx.num_sources();
    const int R = static_cast<int>(inv_grid.boundary.size());
    ScatteringData data;
    data.sources = scenario.sources;
    data.phi.resize(S, R);

    SynthesisReport local_report;
    local_report.method_per_source.resize(S);
    local_report.iterations_per_source.resize(S);
    std::mutex report_mutex;

    run_over_sources(S, threads, [&](int s) {
        const BackgroundField& u0 = ctx.field(s);
        const GreenSolver& solver = ctx.solver(s);
        Eigen::VectorXd u;
        std::string method;
        int iters = 0;
        try {
            auto [fp, fp_report] = fixed_point_solve(truth, u0, solver, 1e-12, 300);
            u = std::move(fp);
            method = "fixed-point";
            iters = fp_report.iterations;
        } catch (const NonConvergenceError&) {
            try {
                u = solve_nonlinear(solver, truth, u0);
                method = "newton";
            } catch (const NonConvergenceError& e) {
                throw NonConvergenceError("synthesize: source " + std::to_string(s) +
                                              " (contrast " + std::to_string(scenario.contrast) +
                                              ") failed: " + e.what(),
                                          e.residual_history);
            }
        }
        Eigen::VectorXd trace(synth_grid.boundary.size());
        for (size_t b = 0; b < synth_grid.boundary.size(); ++b)
            trace(b) = u(synth_grid.boundary[b]) - u0.u(synth_grid.boundary[b]);
        data.phi.row(s) = interp_boundary_trace(synth_grid, trace, inv_grid).transpose();
        std::lock_guard<std::mutex> lock(report_mutex);
        local_report.method_per_source[s] = method;
        local_report.iterations_per_source[s] = iters;
    });

    if (scenario.noise > 0) {
        std::mt19937_64 rng(scenario.seed);
        std::normal_distribution<double> dist;
        const double scale = scenario.noise * data.data_norm();
        for (int s = 0; s < S; ++s)
            for (int r = 0; r < R; ++r) data.phi(s, r) += scale * dist(rng);
    }
    if (report) *report = std::move(local_report);
    return data;
}

namespace {

double relative_l2(const Eigen::VectorXd& err, const Eigen::VectorXd& truth,
                   const Eigen::VectorXd& weights) {
    const double num = std::sqrt(err.cwiseAbs2().dot(weights));
    const double den = std::sqrt(truth.cwiseAbs2().dot(weights));
    if (den > 0) return num / den;
    return num > 0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

ErrorReport evaluate(const Scenario& scenario, const Grid& inversion_grid,
                     const ReconstructionResult& reconstruction) {
    const Susceptibility truth = sample_medium(scenario, inversion_grid);
    if (reconstruction.zeta.size() != inversion_grid.num_nodes())
        throw ShapeError("evaluate: reconstruction does not match the inversion grid");

    const Eigen::VectorXd& w = inversion_grid.weights;
    ErrorReport rep;
    const Eigen::VectorXd da = reconstruction.zeta.alpha - truth.alpha;
    const Eigen::VectorXd db = reconstruction.zeta.beta - truth.beta;
    rep.l2_alpha = relative_l2(da, truth.alpha, w);
    rep.l2_beta = relative_l2(db, truth.beta, w);
    Eigen::VectorXd joint_err(2 * da.size()), joint_truth(2 * da.size()), joint_w(2 * da.size());
    joint_err << da, db;
    joint_truth << truth.alpha, truth.beta;
    joint_w << w, w;
    rep.l2_joint = relative_l2(joint_err, joint_truth, joint_w);
    rep.sup_alpha = da.cwiseAbs().maxCoeff();
    rep.sup_beta = db.cwiseAbs().maxCoeff();

    Susceptibility partial = Susceptibility::zero(truth.size());
    for (const Susceptibility& term : reconstruction.terms) {
        partial = partial + term;
        Eigen::VectorXd e(2 * da.size());
        e << partial.alpha - truth.alpha, partial.beta - truth.beta;
        rep.trajectory.push_back(relative_l2(e, joint_truth, joint_w));
    }

    // cross-section: the whole interval in 1D, the y = 0 line in 2D
    std::vector<std::pair<double, int>> cut;
    for (int i = 0; i < inversion_grid.num_nodes(); ++i) {
        const double y = inversion_grid.dimension > 1 ? inversion_grid.nodes(i, 1) : 0.0;
        if (std::abs(y) < 1e-12) cut.emplace_back(inversion_grid.nodes(i, 0), i);
    }
    std::sort(cut.begin(), cut.end());
    for (const auto& [x, i] : cut)
        rep.cross_section.push_back({x, reconstruction.zeta.alpha(i), reconstruction.zeta.beta(i),
                                     truth.alpha(i), truth.beta(i)});
    return rep;
}

std::string ErrorReport::to_json() const {
    std::ostringstream os;
    os << "{\n  \"l2_alpha\": " << format_double(l2_alpha)
       << ",\n  \"l2_beta\": " << format_double(l2_beta)
       << ",\n  \"l2_joint\": " << format_double(l2_joint)
       << ",\n  \"sup_alpha\": " << format_double(sup_alpha)
       << ",\n  \"sup_beta\": " << format_double(sup_beta) << ",\n  \"trajectory\": [";
    for (size_t i = 0; i < trajectory.size(); ++i)
        os << (i ? ", " : "") << format_double(trajectory[i]);
    os << "]\n}\n";
    return os.str();
}

std::string scenario_to_json(const Scenario& sc) {
    json j;
    j["name"] = sc.name;
    j["domain"] = to_string(sc.domain);
    j["medium"]["type"] = to_string(sc.medium.kind);
    json& p = j["medium"]["params"];
    p["amplitude"] = sc.medium.amplitude;
    p["eps"] = sc.medium.eps;
    p["center"] = {sc.medium.center_x, sc.medium.center_y};
    p["radius_sq"] = sc.medium.radius_sq;
    p["support"] = {sc.medium.support_lo, sc.medium.support_hi};
    p["cell_width"] = sc.medium.cell_width;
    j["contrast"] = sc.contrast;
    j["mask"] = to_string(sc.mask);
    j["sources"]["count"] = sc.sources.size();
    for (const Source& s : sc.sources)
        j["sources"]["list"].push_back({{"location", s.location}, {"scale", s.scale}, {"k", s.k}});
    j["resolutions"]["synthesis"] = sc.synthesis_resolution;
    j["resolutions"]["inversion"] = sc.inversion_resolution;
    j["M"] = sc.order;
    j["tau"] = sc.tau;
    j["noise"] = sc.noise;
    j["seed"] = sc.seed;
    j["restrict_support"] = sc.restrict_support;
    return j.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    write_text_file(path, scenario_to_json(scenario));
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed scenario file " + path.string() + ": " + e.what());
    }
    try {
        Scenario sc;
        sc.name = j.value("name", "");
        sc.domain = domain_kind_from_string(j.at("domain").get<std::string>());
        sc.medium.kind = medium_kind_from_string(j.at("medium").at("type").get<std::string>());
        const json& p = j.at("medium").at("params");
        sc.medium.amplitude = p.value("amplitude", sc.medium.amplitude);
        sc.medium.eps = p.value("eps", sc.medium.eps);
        if (p.contains("center")) {
            sc.medium.center_x = p.at("center").at(0).get<double>();
            sc.medium.center_y = p.at("center").at(1).get<double>();
        }
        sc.medium.radius_sq = p.value("radius_sq", sc.medium.radius_sq);
        if (p.contains("support")) {
            sc.medium.support_lo = p.at("support").at(0).get<double>();
            sc.medium.support_hi = p.at("support").at(1).get<double>();
        }
        sc.medium.cell_width = p.value("cell_width", 0.0);
        sc.contrast = j.value("contrast", 1.0);
        sc.mask = unknown_selection_from_string(j.value("mask", "both"));
        const json& src = j.at("sources");
        if (src.contains("list")) {
            for (const json& s : src.at("list"))
                sc.sources.push_back({s.at("location").get<double>(), s.at("scale").get<double>(),
                                      s.at("k").get<double>()});
        } else {
            for (const json& loc : src.at("locations"))
                for (const json& scale : src.at("scales"))
                    for (const json& k : src.at("frequencies"))
                        sc.sources.push_back(
                            {loc.get<double>(), scale.get<double>(), k.get<double>()});
        }
        sc.synthesis_resolution = j.at("resolutions").at("synthesis").get<int>();
        sc.inversion_resolution = j.at("resolutions").at("inversion").get<int>();
        sc.order = j.value("M", 4);
        sc.tau = j.value("tau", 1e-3);
        sc.noise = j.value("noise", 0.0);
        sc.seed = j.value("seed", std::uint64_t{1});
        sc.restrict_support = j.value("restrict_support", false);
        sc.validate();
        return sc;
    } catch (const json::exception& e) {
        throw ConfigError("invalid scenario file " + path.string() + ": " + e.what());
    }
}

}  // namespace kerrborn
