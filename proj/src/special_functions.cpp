#include "trendmct/special_functions.hpp"

#include <cmath>
#include <limits>

#include "trendmct/errors.hpp"

namespace trendmct {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488016887242097;

double lbeta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double x, double a, double b) {
    constexpr int kMaxIter = 400;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

// Series expansion for P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw NumericError("incomplete gamma series did not converge");
}

// Continued fraction for Q(a, x) = 1 - P(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw NumericError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_quantile(double p) {
    // Wichura's PPND16-style rational approximation, |error| < 1e-15.
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw NumericError("norm_quantile: p outside [0, 1]");
    }
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return q < 0.0 ? -value : value;
}

double reg_inc_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw NumericError("reg_inc_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(x, a, b) / a;
    }
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - lbeta(b, a)) *
                     beta_cf(1.0 - x, b, a) / b;
}

double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw NumericError("gamma_p: a must be positive");
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double t_cdf(double x, double df) {
    if (!(df > 0.0)) throw NumericError("t_cdf: df must be positive");
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    const double z = df / (df + x * x);
    const double half_tail = 0.5 * reg_inc_beta(z, 0.5 * df, 0.5);
    return x <= 0.0 ? half_tail : 1.0 - half_tail;
}

double t_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("t_quantile: p outside (0, 1)");
    if (p == 0.5) return 0.0;
    // Newton iterations from the normal start; the t density is smooth and
    // log-concave, so this converges fast for every df >= 1.
    double x = norm_quantile(p);
    const double log_norm =
        std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * 3.14159265358979323846);
    for (int it = 0; it < 60; ++it) {
        const double err = t_cdf(x, df) - p;
        const double dens = std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(x * x / df));
        if (dens <= 0.0) break;
        const double step = err / dens;
        x -= step;
        if (std::fabs(step) < 1e-12 * (1.0 + std::fabs(x))) break;
    }
    return x;
}

double f_cdf(double x, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw NumericError("f_cdf: degrees of freedom must be positive");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return reg_inc_beta(d1 * x / (d1 * x + d2), 0.5 * d1, 0.5 * d2);
}

double f_quantile(double p, double d1, double d2) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("f_quantile: p outside (0, 1)");
    double lo = 0.0, hi = 1.0;
    while (f_cdf(hi, d1, d2) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw NumericError("f_quantile: failed to bracket");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f_cdf(mid, d1, d2) < p ? lo : hi) = mid;
        if (hi - lo < 1e-12 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

double chi_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("chi_quantile: p outside (0, 1)");
    const double a = 0.5 * df;
    // Wilson-Hilferty starting point for the chi-square quantile, then Newton
    // on P(a, x/2); returns the chi (not chi-square) quantile.
    const double z = norm_quantile(p);
    const double c = 2.0 / (9.0 * df);
    double x2 = df * std::pow(1.0 - c + z * std::sqrt(c), 3);
    if (!(x2 > 0.0)) x2 = 1e-8;
    for (int it = 0; it < 80; ++it) {
        const double u = 0.5 * x2;
        const double err = gamma_p(a, u) - p;
        // d/dx2 P(a, x2/2) = 0.5 * u^{a-1} e^{-u} / Gamma(a)
        const double dens = 0.5 * std::exp((a - 1.0) * std::log(u) - u - std::lgamma(a));
        if (!(dens > 0.0)) break;
        double step = err / dens;
        if (step > 0.5 * x2) step = 0.5 * x2;  // keep the iterate positive
        x2 -= step;
        if (std::fabs(step) < 1e-12 * (1.0 + x2)) break;
    }
    return std::sqrt(x2);
}

}  // namespace trendmct
