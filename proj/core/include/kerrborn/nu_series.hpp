#ifndef KERRBORN_NU_SERIES_HPP
#define KERRBORN_NU_SERIES_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace kerrborn {

using Rational = boost::multiprecision::cpp_rational;

/// The sequence nu_0..nu_N of the recurrence
///   nu_{n+1} = nu_n + sum_{i1+i2+i3 = n} nu_{i1} nu_{i2} nu_{i3}.
/// Exact rational evaluation by default (nu_0 is a double, hence exactly
/// representable); `values` always carries the double view.
struct NuSequence {
    double nu0 = 0.0;
    std::vector<double> values;
    std::vector<Rational> exact;  // empty in float mode
    bool exact_mode = true;

    int max_order() const { return static_cast<int>(values.size()) - 1; }
};

NuSequence nu_sequence(double nu0, int N, bool exact = true);

/// Coefficient defects of x P^3 + (x-1) P + nu_0 through order N-1, where
/// P is the truncated generating series of `seq`. All zero when the sequence
/// satisfies the recurrence (exactly so in rational mode).
std::vector<double> generating_polynomial_defects(const NuSequence& seq);

/// Maximum absolute defect; requires at least 3 stored orders.
double verify_generating_polynomial(const NuSequence& seq);

struct GrowthConstants {
    double K = 0.0;
    double nu = 0.0;
    std::string estimator;
};

/// Tail-ratio estimate: K = 1.05 * max of nu_{n+1}/nu_n over the last quarter
/// of the sequence, nu = max_n nu_n K^{-n}. Guarantees nu_n <= nu K^n for all
/// stored n. Requires length >= 16.
GrowthConstants estimate_growth(const NuSequence& seq);

/// Positive root x* of the discriminant of the cubic x p^3 + (x-1) p + nu_0
/// in p, located by bisection; the generating series is singular there.
double singularity_radius(double nu0);

/// Alternate growth path: K = 1/x* from the discriminant root.
GrowthConstants growth_from_discriminant(const NuSequence& seq);

/// Forward radius of convergence 1/(K mu).
double forward_radius(double mu, double K);

struct InverseRadius {
    double C = 0.0;
    double r = 0.0;
};

/// C = max{2, pinv_norm * nu * K * mu},
/// r = (1/(2 K mu)) (sqrt(16 C^2 + 1) - 4 C).
InverseRadius inverse_radius(double mu, double K, double nu, double pinv_norm);

struct ConvergenceReport {
    double mu = 0.0;
    int mu_rows_used = 0;
    double nu0 = 0.0;
    std::vector<double> nu_values;
    double K = 0.0;
    double nu = 0.0;
    std::string estimator;
    double forward_radius = 0.0;
    double pinv_norm = 0.0;
    double C = 0.0;
    double inverse_radius = 0.0;
    double generating_defect = 0.0;
    std::string to_json() const;
};

}  // namespace kerrborn

#endif
