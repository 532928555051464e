// Command-line front end: forward solves, data synthesis, convergence
// analysis and inverse-series reconstruction, each writing a reproducible
// run directory.
//
// Exit codes: 0 success (possibly with warnings), 1 usage/config/IO error,
// 2 numerical non-convergence.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "kerrborn/errors.hpp"
#include "kerrborn/experiments.hpp"
#include "kerrborn/io.hpp"
#include "kerrborn/nu_series.hpp"

namespace fs = std::filesystem;
using namespace kerrborn;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    std::string scenario_path;
    std::string out_dir;
    std::optional<int> order;
    std::optional<double> tau;
    std::optional<double> noise;
    std::optional<std::uint64_t> seed;
    std::optional<int> synth_res;
    std::optional<int> inv_res;
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    bool check_data = false;
    int verbosity = 0;
};

Scenario load_with_overrides(const RunConfig& cfg) {
    Scenario sc = load_scenario(cfg.scenario_path);
    if (cfg.order) sc.order = *cfg.order;
    if (cfg.tau) sc.tau = *cfg.tau;
    if (cfg.noise) sc.noise = *cfg.noise;
    if (cfg.seed) sc.seed = *cfg.seed;
    if (cfg.synth_res) sc.synthesis_resolution = *cfg.synth_res;
    if (cfg.inv_res) sc.inversion_resolution = *cfg.inv_res;
    sc.validate();  // overrides obey the same rules as scenario files
    return sc;
}

void write_manifest(const fs::path& dir, const Scenario& sc, const RunConfig& cfg,
                    const std::string& subcommand) {
    const std::string canonical = scenario_to_json(sc);
    std::ostringstream os;
    os << "{\n";
    os << "  \"subcommand\": \"" << subcommand << "\",\n";
    os << "  \"version\": \"" << kVersion << "\",\n";
    os << "  \"config_hash\": \"" << std::hex << std::hash<std::string>{}(canonical)
       << std::dec << "\",\n";
    os << "  \"parameters\": {\n";
    os << "    \"M\": " << sc.order << ",\n";
    os << "    \"tau\": " << format_double(sc.tau) << ",\n";
    os << "    \"noise\": " << format_double(sc.noise) << ",\n";
    os << "    \"seed\": " << sc.seed << ",\n";
    os << "    \"threads\": " << cfg.threads << ",\n";
    os << "    \"synthesis_resolution\": " << sc.synthesis_resolution << ",\n";
    os << "    \"inversion_resolution\": " << sc.inversion_resolution << ",\n";
    os << "    \"growth_estimator\": \"tail-ratio\",\n";
    os << "    \"growth_safety_factor\": 1.05,\n";
    os << "    \"data_norm\": \"uniform-l2\",\n";
    os << "    \"zeta_norm\": \"sup\",\n";
    os << "    \"resonance_guard\": 1e-06\n";
    os << "  }\n}\n";
    write_text_file(dir / "manifest.json", os.str());
}

void write_phi_csv(const fs::path& path, const ScatteringData& data) {
    std::vector<std::vector<double>> rows;
    for (int s = 0; s < data.phi.rows(); ++s)
        for (int r = 0; r < data.phi.cols(); ++r)
            rows.push_back({static_cast<double>(s), static_cast<double>(r), data.phi(s, r)});
    write_csv(path, {"source", "receiver", "phi"}, rows);
}

ScatteringData read_phi_csv(const fs::path& path, const Scenario& sc, int receivers) {
    Eigen::MatrixXd raw = read_matrix_csv(path);
    if (raw.cols() != 3) throw ConfigError("phi.csv must have columns source,receiver,phi");
    ScatteringData data;
    data.sources = sc.sources;
    data.phi = Eigen::MatrixXd::Zero(sc.sources.size(), receivers);
    for (int i = 0; i < raw.rows(); ++i) {
        const int s = static_cast<int>(raw(i, 0));
        const int r = static_cast<int>(raw(i, 1));
        if (s < 0 || s >= data.phi.rows() || r < 0 || r >= data.phi.cols())
            throw ConfigError("phi.csv indices out of range for this scenario");
        data.phi(s, r) = raw(i, 2);
    }
    return data;
}

struct AnalysisPieces {
    double mu = 0.0;
    int mu_rows = 0;
    double nu0 = 0.0;
    NuSequence seq;
    GrowthConstants growth;
    double fwd_radius = 0.0;
    InverseRadius inv_radius;
    double pinv_norm = 0.0;
    int effective_rank = 0;
};

AnalysisPieces analyze_convergence(const ForwardContext& ctx, const LinearizedMap& map,
                                   const RegularizedPseudoinverse& pinv) {
    AnalysisPieces a;
    std::set<double> ks;
    for (const Source& s : ctx.sources()) ks.insert(s.k);
    for (double k : ks) {
        int rows = 0;
        a.mu = std::max(a.mu, estimate_mu(ctx.solver_for_k(k), &rows));
        a.mu_rows = rows;
    }
    for (int s = 0; s < ctx.num_sources(); ++s)
        a.nu0 = std::max(a.nu0, ctx.field(s).u.cwiseAbs().maxCoeff());
    a.seq = nu_sequence(a.nu0, 25);
    a.growth = estimate_growth(a.seq);
    a.fwd_radius = forward_radius(a.mu, a.growth.K);
    a.pinv_norm = pinv.norm();
    a.effective_rank = pinv.effective_rank();
    a.inv_radius = inverse_radius(a.mu, a.growth.K, a.growth.nu, a.pinv_norm);
    return a;
}

int cmd_forward(const RunConfig& cfg) {
    const Scenario sc = load_with_overrides(cfg);
    const Grid grid = build_grid(sc.domain, sc.synthesis_resolution);
    ForwardContext ctx(grid, sc.sources);
    const Susceptibility zeta = sample_medium(sc, grid);

    const int N = std::max(sc.order, 1);
    std::vector<double> term_norms(N, 0.0);   // boundary sup over sources
    std::vector<double> cum_residual(N, 0.0); // ||U_n - u_fp||_inf over sources
    FixedPointReport worst;
    bool all_converged = true;

    try {
        for (int s = 0; s < ctx.num_sources(); ++s) {
            auto [u_fp, rep] = fixed_point_solve(zeta, ctx.field(s), ctx.solver(s), 1e-12, 500);
            worst.iterations = std::max(worst.iterations, rep.iterations);
            worst.final_residual = std::max(worst.final_residual, rep.final_residual);
            worst.contraction_quotient =
                std::max(worst.contraction_quotient, rep.contraction_quotient);
            TermCache cache;
            Eigen::VectorXd partial = ctx.field(s).u;
            std::vector<Susceptibility> pool(N, zeta);
            for (int n = 1; n <= N; ++n) {
                Eigen::VectorXd term = compute_K(
                    n, std::span<const Susceptibility>(pool.data(), n), ctx.field(s),
                    ctx.solver(s), &cache);
                partial += term;
                double bnorm = 0.0;
                for (int b : grid.boundary) bnorm = std::max(bnorm, std::abs(term(b)));
                term_norms[n - 1] = std::max(term_norms[n - 1], bnorm);
                cum_residual[n - 1] = std::max(cum_residual[n - 1],
                                               (partial - u_fp).cwiseAbs().maxCoeff());
            }
        }
    } catch (const NonConvergenceError& e) {
        std::cerr << "forward: " << e.what() << "\n";
        all_converged = false;
    }

    fs::create_directories(cfg.out_dir);
    std::vector<std::vector<double>> rows;
    for (int n = 1; n <= N; ++n)
        rows.push_back({static_cast<double>(n), term_norms[n - 1], cum_residual[n - 1]});
    write_csv(fs::path(cfg.out_dir) / "terms.csv",
              {"order", "term_data_norm", "cumulative_residual"}, rows);
    std::ostringstream os;
    os << "{\n  \"converged\": " << (all_converged ? "true" : "false")
       << ",\n  \"iterations\": " << worst.iterations
       << ",\n  \"final_residual\": " << format_double(worst.final_residual)
       << ",\n  \"contraction_quotient\": " << format_double(worst.contraction_quotient)
       << "\n}\n";
    write_text_file(fs::path(cfg.out_dir) / "forward_report.json", os.str());
    write_manifest(cfg.out_dir, sc, cfg, "forward");
    return all_converged ? 0 : 2;
}

int cmd_synth(const RunConfig& cfg) {
    const Scenario sc = load_with_overrides(cfg);
    SynthesisReport report;
    const ScatteringData data = synthesize(sc, &report, cfg.threads);
    fs::create_directories(cfg.out_dir);
    write_phi_csv(fs::path(cfg.out_dir) / "phi.csv", data);
    std::ostringstream os;
    os << "{\n  \"sources\": " << data.phi.rows() << ",\n  \"receivers\": " << data.phi.cols()
       << ",\n  \"data_norm\": " << format_double(data.data_norm()) << ",\n  \"methods\": [";
    for (size_t i = 0; i < report.method_per_source.size(); ++i)
        os << (i ? ", " : "") << '"' << report.method_per_source[i] << '"';
    os << "]\n}\n";
    write_text_file(fs::path(cfg.out_dir) / "synthesis_report.json", os.str());
    write_manifest(cfg.out_dir, sc, cfg, "synth");
    return 0;
}

int cmd_invert(const RunConfig& cfg) {
    const Scenario sc = load_with_overrides(cfg);
    const fs::path phi_path = fs::path(cfg.out_dir) / "phi.csv";
    if (!fs::exists(phi_path)) {
        std::cerr << "invert: missing " << phi_path << " (run synth first)\n";
        return 1;
    }
    const Grid grid = build_grid(sc.domain, sc.inversion_resolution);
    ForwardContext ctx(grid, sc.sources);
    const ScatteringData phi = read_phi_csv(phi_path, sc, ctx.num_receivers());

    UnknownLayout layout = scenario_layout(sc, grid);
    const LinearizedMap map = assemble_K1(ctx, layout);
    const RegularizedPseudoinverse pinv = build_pinv(map, sc.tau);
    const AnalysisPieces a = analyze_convergence(ctx, map, pinv);

    const ReconstructionResult rec =
        reconstruct(phi, sc.order, pinv, map, ctx, a.inv_radius.r);
    const ErrorReport err = evaluate(sc, grid, rec);
    const Susceptibility truth = sample_medium(sc, grid);

    std::vector<std::vector<double>> rows;
    for (int i = 0; i < grid.num_nodes(); ++i) {
        std::vector<double> row{static_cast<double>(i), grid.nodes(i, 0),
                                grid.dimension > 1 ? grid.nodes(i, 1) : 0.0,
                                rec.zeta.alpha(i), rec.zeta.beta(i), truth.alpha(i),
                                truth.beta(i)};
        rows.push_back(std::move(row));
    }
    write_csv(fs::path(cfg.out_dir) / "recon.csv",
              {"cell", "x", "y", "alpha_recon", "beta_recon", "alpha_true", "beta_true"}, rows);

    std::vector<std::vector<double>> cs;
    for (const CrossSectionSample& s : err.cross_section)
        cs.push_back({s.coordinate, s.alpha_recon, s.beta_recon, s.alpha_true, s.beta_true});
    write_csv(fs::path(cfg.out_dir) / "crosssection.csv",
              {"x", "alpha_recon", "beta_recon", "alpha_true", "beta_true"}, cs);

    std::ostringstream os;
    os << "{\n  \"k1phi_norm\": " << format_double(rec.k1phi_norm)
       << ",\n  \"radius\": " << format_double(rec.radius)
       << ",\n  \"radius_warning\": " << (rec.radius_warning ? "true" : "false")
       << ",\n  \"tau\": " << format_double(sc.tau)
       << ",\n  \"effective_rank\": " << a.effective_rank
       << ",\n  \"pinv_norm\": " << format_double(a.pinv_norm) << ",\n  \"term_norms\": [";
    for (size_t i = 0; i < rec.term_norms.size(); ++i)
        os << (i ? ", " : "") << format_double(rec.term_norms[i]);
    os << "]\n}\n";
    write_text_file(fs::path(cfg.out_dir) / "diagnostics.json", os.str());
    write_text_file(fs::path(cfg.out_dir) / "report.json", err.to_json());
    write_manifest(cfg.out_dir, sc, cfg, "invert");
    if (rec.radius_warning)
        std::cerr << "invert: warning: ||K1+ phi|| = " << rec.k1phi_norm
                  << " >= theoretical radius " << rec.radius << "\n";
    return 0;
}

int cmd_analyze(const RunConfig& cfg) {
    const Scenario sc = load_with_overrides(cfg);
    const Grid grid = build_grid(sc.domain, sc.inversion_resolution);
    ForwardContext ctx(grid, sc.sources);
    const UnknownLayout layout = scenario_layout(sc, grid);
    const LinearizedMap map = assemble_K1(ctx, layout);
    const RegularizedPseudoinverse pinv = build_pinv(map, sc.tau);
    const AnalysisPieces a = analyze_convergence(ctx, map, pinv);

    ConvergenceReport report;
    report.mu = a.mu;
    report.mu_rows_used = a.mu_rows;
    report.nu0 = a.nu0;
    report.nu_values = a.seq.values;
    report.K = a.growth.K;
    report.nu = a.growth.nu;
    report.estimator = a.growth.estimator;
    report.forward_radius = a.fwd_radius;
    report.pinv_norm = a.pinv_norm;
    report.C = a.inv_radius.C;
    report.inverse_radius = a.inv_radius.r;
    report.generating_defect = verify_generating_polynomial(a.seq);

    std::string data_check;
    if (cfg.check_data) {
        const fs::path phi_path = fs::path(cfg.out_dir) / "phi.csv";
        if (!fs::exists(phi_path)) {
            std::cerr << "analyze: --check-data requested but " << phi_path << " is missing\n";
            return 1;
        }
        const ScatteringData phi = read_phi_csv(phi_path, sc, ctx.num_receivers());
        const Susceptibility k1phi = map.layout.embed(grid, pinv.apply(phi.stacked()));
        std::ostringstream os;
        os << ",\n\"data_check\": {\"k1phi_norm\": " << format_double(k1phi.sup_norm())
           << ", \"within_radius\": "
           << (k1phi.sup_norm() < a.inv_radius.r ? "true" : "false") << "}";
        data_check = os.str();
    }

    fs::create_directories(cfg.out_dir);
    std::string body = report.to_json();
    if (!data_check.empty()) {
        const auto pos = body.rfind("\n}");
        body.insert(pos, data_check);
    }
    write_text_file(fs::path(cfg.out_dir) / "convergence_report.json", body);
    write_manifest(cfg.out_dir, sc, cfg, "analyze");
    return 0;
}

int cmd_scenario(const std::string& preset, const std::string& out_path) {
    Scenario sc;
    if (preset == "1d-gaussian") {
        sc = scenario_1d_paper();
    } else if (preset == "2d-disk-weak") {
        sc = scenario_2d(1.0, MediumKind::Disk, UnknownSelection::Both);
    } else if (preset == "2d-disk-strong") {
        sc = scenario_2d(16.0, MediumKind::Disk, UnknownSelection::Both);
    } else if (preset == "2d-gaussian") {
        sc = scenario_2d(1.0, MediumKind::Gaussian2D, UnknownSelection::Both);
    } else {
        std::cerr << "unknown preset '" << preset
                  << "' (try 1d-gaussian, 2d-disk-weak, 2d-disk-strong, 2d-gaussian)\n";
        return 1;
    }
    save_scenario(sc, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Born and inverse Born series for the Kerr-nonlinear Helmholtz problem"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", cfg.scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", cfg.out_dir, "output/run directory")->required();
        sub->add_option("--order", cfg.order, "inverse-series order M override");
        sub->add_option("--tau", cfg.tau, "pseudoinverse truncation threshold override");
        sub->add_option("--noise", cfg.noise, "relative noise level override");
        sub->add_option("--seed", cfg.seed, "RNG seed override");
        sub->add_option("--synthesis-resolution", cfg.synth_res, "synthesis grid override");
        sub->add_option("--inversion-resolution", cfg.inv_res, "inversion grid override");
        sub->add_option("--threads", cfg.threads, "worker thread cap");
        sub->add_flag("-v,--verbose", cfg.verbosity, "verbosity");
    };

    CLI::App* forward = app.add_subcommand("forward", "fixed-point solve and Born partial sums");
    CLI::App* synth = app.add_subcommand("synth", "synthesize scattering data phi");
    CLI::App* invert = app.add_subcommand("invert", "inverse Born series reconstruction");
    CLI::App* analyze = app.add_subcommand("analyze", "convergence constants and radii");
    for (CLI::App* sub : {forward, synth, invert, analyze}) add_common(sub);
    analyze->add_flag("--check-data", cfg.check_data, "check ||K1+ phi|| against the radius");

    std::string preset, preset_out;
    CLI::App* scenario = app.add_subcommand("scenario", "write a built-in scenario file");
    scenario->add_option("--preset", preset, "preset name")->required();
    scenario->add_option("--out", preset_out, "output JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(scenario)) return cmd_scenario(preset, preset_out);
        if (app.got_subcommand(forward)) return cmd_forward(cfg);
        if (app.got_subcommand(synth)) return cmd_synth(cfg);
        if (app.got_subcommand(invert)) return cmd_invert(cfg);
        return cmd_analyze(cfg);
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
