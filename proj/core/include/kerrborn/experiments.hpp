#ifndef KERRBORN_EXPERIMENTS_HPP
#define KERRBORN_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kerrborn/inversion.hpp"

namespace kerrborn {

enum class UnknownSelection { Both, AlphaOnly, BetaOnly };
std::string to_string(UnknownSelection sel);
UnknownSelection unknown_selection_from_string(const std::string& name);

enum class MediumKind { Gaussian1D, Disk, Gaussian2D, SingleCell };
std::string to_string(MediumKind kind);
MediumKind medium_kind_from_string(const std::string& name);

struct MediumSpec {
    MediumKind kind = MediumKind::Gaussian1D;
    double amplitude = 0.2;      // gamma prefactor of amplitude/sqrt(2 pi eps), or plateau value
    double eps = 0.01;           // gaussian variance parameter
    double center_x = 0.5;
    double center_y = 0.0;
    double radius_sq = 0.2;      // disk plateau: (x - cx)^2 + (y - cy)^2 <= radius_sq
    double support_lo = 0.4;     // 1D truncation window
    double support_hi = 0.6;
    double cell_width = 0.0;     // SingleCell tent half-width (0 = inversion-grid h)
};

struct Scenario {
    std::string name;
    DomainKind domain = DomainKind::Interval;
    MediumSpec medium;
    double contrast = 1.0;
    UnknownSelection mask = UnknownSelection::Both;
    std::vector<Source> sources;
    int synthesis_resolution = 129;
    int inversion_resolution = 65;
    int order = 4;       // inverse-series order M
    double tau = 1e-3;   // pseudoinverse truncation threshold
    double noise = 0.0;  // relative additive noise level
    std::uint64_t seed = 1;
    bool restrict_support = false;  // unknowns restricted to the medium's a-priori support

    void validate() const;  // throws ConfigError
};

/// Unknown layout for a scenario on the inversion grid: interior cells,
/// alpha/beta selected by the mask, optionally restricted to the medium's
/// known support window (the interval's few boundary samples cannot resolve
/// an unrestricted medium pointwise).
UnknownLayout scenario_layout(const Scenario& scenario, const Grid& grid);

/// 1D interval scenario: Gaussian alpha = beta, 12 geometric source scales
/// per side at frequencies 0.9, 1.0, 1.1 (72 sources).
Scenario scenario_1d_paper();

/// Unit-disk scenario with a plateau or Gaussian medium at the given contrast
/// and unknown selection; 16 boundary point sources at k = 1.
Scenario scenario_2d(double contrast, MediumKind medium, UnknownSelection selection);

/// Samples the true medium on a grid (contrast and mask applied,
/// boundary clamped to zero).
Susceptibility sample_medium(const Scenario& scenario, const Grid& grid);

/// Direct solve of the discrete nonlinear problem
///   (Delta + k^2 (1 + alpha)) u + k^2 beta u^3 = 0, du/dnu = g,
/// by damped Newton with contrast continuation; reference path when the
/// fixed-point iteration is out of its contraction regime.
Eigen::VectorXd solve_nonlinear(const GreenSolver& solver, const Susceptibility& zeta,
                                const BackgroundField& u0);

struct SynthesisReport {
    std::vector<std::string> method_per_source;  // "fixed-point" or "newton"
    std::vector<int> iterations_per_source;
    double max_residual = 0.0;
    double mu_synthesis = 0.0;
};

/// Solves the forward problem per source on the synthesis grid and returns
/// phi = (u - u0) interpolated to the inversion grid's boundary nodes.
ScatteringData synthesize(const Scenario& scenario, SynthesisReport* report = nullptr,
                          int threads = 1);

struct CrossSectionSample {
    double coordinate;  // x along the cut
    double alpha_recon, beta_recon, alpha_true, beta_true;
};

struct ErrorReport {
    double l2_alpha = 0.0, l2_beta = 0.0, l2_joint = 0.0;
    double sup_alpha = 0.0, sup_beta = 0.0;
    std::vector<double> trajectory;  // joint l2 error after 1..M terms
    std::vector<CrossSectionSample> cross_section;  // along y=0 (2D) or the interval
    std::string to_json() const;
};

ErrorReport evaluate(const Scenario& scenario, const Grid& inversion_grid,
                     const ReconstructionResult& reconstruction);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace kerrborn

#endif
