#include "kerrborn/nu_series.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "kerrborn/errors.hpp"
#include "kerrborn/io.hpp"

namespace kerrborn {

NuSequence nu_sequence(double nu0, int N, bool exact) {
    if (!(nu0 >= 0)) throw DomainError("nu_sequence: nu0 must be nonnegative");
    if (N < 0) throw DomainError("nu_sequence: N must be nonnegative");

    NuSequence seq;
    seq.nu0 = nu0;
    seq.exact_mode = exact;
    if (exact) {
        seq.exact.reserve(N + 1);
        seq.exact.push_back(Rational(nu0));
        for (int n = 0; n < N; ++n) {
            Rational triple_sum = 0;
            for (int i1 = 0; i1 <= n; ++i1)
                for (int i2 = 0; i2 <= n - i1; ++i2)
                    triple_sum += seq.exact[i1] * seq.exact[i2] * seq.exact[n - i1 - i2];
            seq.exact.push_back(seq.exact[n] + triple_sum);
        }
        seq.values.reserve(N + 1);
        for (const Rational& v : seq.exact) {
            double d = static_cast<double>(v);
            if (!std::isfinite(d))
                throw DomainError("nu_sequence: value exceeds double range at order " +
                                  std::to_string(seq.values.size()));
            seq.values.push_back(d);
        }
    } else {
        seq.values.reserve(N + 1);
        seq.values.push_back(nu0);
        for (int n = 0; n < N; ++n) {
            double triple_sum = 0;
            for (int i1 = 0; i1 <= n; ++i1)
                for (int i2 = 0; i2 <= n - i1; ++i2)
                    triple_sum += seq.values[i1] * seq.values[i2] * seq.values[n - i1 - i2];
            const double next = seq.values[n] + triple_sum;
            if (!std::isfinite(next))
                throw DomainError("nu_sequence: overflow at order " + std::to_string(n + 1));
            seq.values.push_back(next);
        }
    }
    return seq;
}

namespace {

template <typename T>
std::vector<T> polynomial_defects_impl(const std::vector<T>& nu, double /*unused*/) {
    const int N = static_cast<int>(nu.size()) - 1;
    // cube coefficients f_n, n <= N-2, each needs nu up to n only
    std::vector<T> f(std::max(N - 1, 0), T(0));
    for (int n = 0; n <= N - 2; ++n)
        for (int i1 = 0; i1 <= n; ++i1)
            for (int i2 = 0; i2 <= n - i1; ++i2)
                f[n] += nu[i1] * nu[i2] * nu[n - i1 - i2];
    // coefficient of x^m in x P^3 + (x-1) P + nu0, m = 0..N-1
    std::vector<T> defect(N, T(0));
    for (int m = 0; m <= N - 1; ++m) {
        T c = -nu[m];
        if (m >= 1) {
            c += f[m - 1];
            c += nu[m - 1];
        } else {
            c += T(nu[0]);  // + nu0
        }
        defect[m] = c;
    }
    return defect;
}

}  // namespace

std::vector<double> generating_polynomial_defects(const NuSequence& seq) {
    if (seq.values.size() < 3)
        throw DomainError("generating_polynomial_defects: need at least 3 orders");
    std::vector<double> out;
    if (seq.exact_mode) {
        auto d = polynomial_defects_impl<Rational>(seq.exact, 0.0);
        out.reserve(d.size());
        for (const Rational& v : d) out.push_back(static_cast<double>(v));
    } else {
        out = polynomial_defects_impl<double>(seq.values, 0.0);
    }
    return out;
}

double verify_generating_polynomial(const NuSequence& seq) {
    double worst = 0.0;
    for (double d : generating_polynomial_defects(seq)) worst = std::max(worst, std::abs(d));
    return worst;
}

GrowthConstants estimate_growth(const NuSequence& seq) {
    const int N = seq.max_order();
    if (N + 1 < 16) throw DomainError("estimate_growth: sequence too short (need >= 16)");
    double ratio = 0.0;
    const int tail_start = N - (N + 1) / 4;
    for (int n = tail_start; n < N; ++n)
        ratio = std::max(ratio, seq.values[n + 1] / seq.values[n]);
    GrowthConstants g;
    g.K = 1.05 * ratio;  // safety margin
    g.estimator = "tail-ratio";
    double nu = 0.0;
    double Kn = 1.0;
    for (int n = 0; n <= N; ++n) {
        nu = std::max(nu, seq.values[n] / Kn);
        Kn *= g.K;
    }
    g.nu = nu;
    return g;
}

double singularity_radius(double nu0) {
    if (!(nu0 > 0)) throw DomainError("singularity_radius: nu0 must be positive");
    // discriminant of x p^3 + (x-1) p + nu0 (no quadratic term):
    // D(x) = -4 x (x-1)^3 - 27 x^2 nu0^2; D > 0 near 0+, root marks the singularity
    auto D = [nu0](double x) {
        return -4.0 * x * std::pow(x - 1.0, 3) - 27.0 * x * x * nu0 * nu0;
    };
    double lo = 0.0, hi = 1.0;
    // D(1) = -27 nu0^2 < 0, D(0+) > 0
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (D(mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

GrowthConstants growth_from_discriminant(const NuSequence& seq) {
    GrowthConstants g;
    g.K = 1.0 / singularity_radius(seq.nu0);
    g.estimator = "discriminant-root";
    double nu = 0.0;
    double Kn = 1.0;
    for (int n = 0; n <= seq.max_order(); ++n) {
        nu = std::max(nu, seq.values[n] / Kn);
        Kn *= g.K;
    }
    g.nu = nu;
    return g;
}

double forward_radius(double mu, double K) {
    if (!(mu > 0) || !(K > 0)) throw DomainError("forward_radius: mu and K must be positive");
    return 1.0 / (K * mu);
}

InverseRadius inverse_radius(double mu, double K, double nu, double pinv_norm) {
    if (!(mu > 0) || !(K > 0) || !(nu > 0) || !(pinv_norm > 0))
        throw DomainError("inverse_radius: all inputs must be positive");
    InverseRadius ir;
    ir.C = std::max(2.0, pinv_norm * nu * K * mu);
    ir.r = (std::sqrt(16.0 * ir.C * ir.C + 1.0) - 4.0 * ir.C) / (2.0 * K * mu);
    return ir;
}

std::string ConvergenceReport::to_json() const {
    std::ostringstream os;
    os << "{\n";
    os << "  \"mu\": " << format_double(mu) << ",\n";
    os << "  \"mu_rows_used\": " << mu_rows_used << ",\n";
    os << "  \"nu0\": " << format_double(nu0) << ",\n";
    os << "  \"nu_sequence\": [";
    for (size_t i = 0; i < nu_values.size(); ++i)
        os << (i ? ", " : "") << format_double(nu_values[i]);
    os << "],\n";
    os << "  \"K\": " << format_double(K) << ",\n";
    os << "  \"nu\": " << format_double(nu) << ",\n";
    os << "  \"estimator\": \"" << estimator << "\",\n";
    os << "  \"growth_safety_factor\": 1.05,\n";
    os << "  \"forward_radius\": " << format_double(forward_radius) << ",\n";
    os << "  \"pinv_norm\": " << format_double(pinv_norm) << ",\n";
    os << "  \"C\": " << format_double(C) << ",\n";
    os << "  \"inverse_radius\": " << format_double(inverse_radius) << ",\n";
    os << "  \"generating_defect\": " << format_double(generating_defect) << "\n";
    os << "}\n";
    return os.str();
}

}  // namespace kerrborn
