// Multivariate t / normal rectangle probabilities. The independent oracles:
//
//  * identity correlation, normal limit: exact product of univariate cdfs;
//  * identity correlation, finite df: one-dimensional quadrature over the
//    shared radial scale s = chi_df/sqrt(df) of prod_i (Phi(u_i s) - Phi(l_i s)).
//    Coordinates share one chi divisor, so they are only conditionally
//    independent given s — the plain product of t cdfs is NOT the answer, and
//    one test pins that difference so it cannot be "simplified" back in;
//  * bivariate case: classical reduction to a single integral of
//    phi(x) * Phi((b - rho x)/sqrt(1 - rho^2)), radial-mixed for finite df;
//  * sign symmetry: the all-negative orthant has probability 2^-dim for any
//    radial mixing.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <vector>

#include "doctest.h"
#include "trendmct/contrasts.hpp"
#include "trendmct/dist.hpp"
#include "trendmct/errors.hpp"
#include "trendmct/special_functions.hpp"

using namespace trendmct;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nodes and weights of n-point Gauss-Legendre quadrature on [0, 1], by Newton
// iteration on the Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));  // root guess on [-1, 1]
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::fabs(step) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 + x);
        weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

// Composite Gauss-Legendre integral of f over [a, b].
template <typename F>
double integrate(F&& f, double a, double b, int panels = 48, int order = 16) {
    static thread_local std::vector<double> nodes, weights;
    if (nodes.size() != static_cast<std::size_t>(order)) gauss_legendre(order, nodes, weights);
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double left = a + p * h;
        double acc = 0.0;
        for (int i = 0; i < order; ++i)
            acc += weights[static_cast<std::size_t>(i)] *
                   f(left + h * nodes[static_cast<std::size_t>(i)]);
        total += acc * h;
    }
    return total;
}

// Radial-mixture oracle for identity correlation: integrates the conditional
// product over the distribution of the shared scale s = chi_df / sqrt(df)
// (via its quantile function, so the measure is uniform on (0, 1)).
double radial_identity_oracle(const std::vector<double>& lower,
                              const std::vector<double>& upper, int df) {
    auto conditional = [&](double s) {
        double prod = 1.0;
        for (std::size_t i = 0; i < lower.size(); ++i) {
            const double hi = upper[i] == kInf ? 1.0 : norm_cdf(upper[i] * s);
            const double lo = lower[i] == -kInf ? 0.0 : norm_cdf(lower[i] * s);
            prod *= hi - lo;
        }
        return prod;
    };
    const double inv_sqrt_df = 1.0 / std::sqrt(static_cast<double>(df));
    return integrate(
        [&](double u) { return conditional(chi_quantile(u, df) * inv_sqrt_df); }, 0.0, 1.0,
        96, 16);
}

// Bivariate normal P(la <= X <= ua, lb <= Y <= ub) with correlation rho.
double bivariate_normal_oracle(double rho, double la, double ua, double lb, double ub) {
    const double s = std::sqrt(1.0 - rho * rho);
    auto f = [&](double x) {
        const double hi = ub == kInf ? 1.0 : norm_cdf((ub - rho * x) / s);
        const double lo = lb == -kInf ? 0.0 : norm_cdf((lb - rho * x) / s);
        const double d = x * x;
        return 0.3989422804014327 * std::exp(-0.5 * d) * (hi - lo);
    };
    const double a = la == -kInf ? -8.5 : la;
    const double b = ua == kInf ? 8.5 : ua;
    return integrate(f, a, b, 64, 16);
}

// Bivariate t by mixing the normal oracle over the shared radial scale.
double bivariate_t_oracle(double rho, double ua, double ub, int df) {
    const double inv_sqrt_df = 1.0 / std::sqrt(static_cast<double>(df));
    return integrate(
        [&](double u) {
            const double scale = chi_quantile(u, df) * inv_sqrt_df;
            return bivariate_normal_oracle(rho, -kInf, ua * scale, -kInf, ub * scale);
        },
        0.0, 1.0, 48, 16);
}

CorrelationMatrix identity(std::size_t m) {
    CorrelationMatrix R;
    R.entries.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) R.entries[i][i] = 1.0;
    return R;
}

CorrelationMatrix equicorrelated(std::size_t m, double rho) {
    CorrelationMatrix R = identity(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j) R.entries[i][j] = rho;
    return R;
}

MvtProblem one_sided_problem(const CorrelationMatrix& R, const std::vector<double>& upper,
                             int df) {
    MvtProblem p;
    p.correlation = R;
    p.df = df;
    p.lower.assign(upper.size(), -kInf);
    p.upper = upper;
    return p;
}

}  // namespace

TEST_CASE("quadrature machinery self-check") {
    // exp integrates exactly enough, and the normal density to ~1.
    CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) ==
          doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
    CHECK(bivariate_normal_oracle(0.0, -kInf, 1.0, -kInf, 2.0) ==
          doctest::Approx(norm_cdf(1.0) * norm_cdf(2.0)).epsilon(1e-9));
}

TEST_CASE("one-dimensional rectangles reduce to the scalar cdf") {
    for (double x : {-1.0, 0.0, 2.0}) {
        auto p = one_sided_problem(identity(1), {x}, 10);
        const ProbabilityEstimate est = mvt_rectangle(p);
        CHECK(est.value == doctest::Approx(t_cdf(x, 10.0)).epsilon(1e-11));
        p.df = 0;
        CHECK(mvt_rectangle(p).value == doctest::Approx(norm_cdf(x)).epsilon(1e-11));
    }
}

TEST_CASE("normal limit with identity correlation is the product of cdfs") {
    const std::vector<double> upper{0.5, 1.0, 2.0};
    const ProbabilityEstimate est = mvt_rectangle(one_sided_problem(identity(3), upper, 0));
    const double expect = norm_cdf(0.5) * norm_cdf(1.0) * norm_cdf(2.0);
    CHECK(std::fabs(est.value - expect) <= 5e-4);
    CHECK(est.error_bound <= 5e-4);
}

TEST_CASE("identity correlation with finite df matches the radial mixture, not the product") {
    const std::vector<double> lower(3, -kInf);
    const std::vector<double> upper(3, 1.0);
    const double oracle = radial_identity_oracle(lower, upper, 30);
    // Independent pin for the oracle itself.
    CHECK(oracle == doctest::Approx(0.5895450).epsilon(4e-5));

    const ProbabilityEstimate est = mvt_rectangle(one_sided_problem(identity(3), upper, 30));
    CHECK(std::fabs(est.value - oracle) <= 5e-4);

    // The shared chi divisor couples the coordinates: the naive product of
    // univariate t cdfs is measurably wrong and must stay rejected.
    const double naive = std::pow(t_cdf(1.0, 30.0), 3.0);
    CHECK(std::fabs(est.value - naive) >= 1.5e-3);

    // Lower df couples more strongly.
    const double oracle5 = radial_identity_oracle(lower, upper, 5);
    const ProbabilityEstimate est5 = mvt_rectangle(one_sided_problem(identity(3), upper, 5));
    CHECK(std::fabs(est5.value - oracle5) <= 5e-4);
    CHECK(std::fabs(est5.value - std::pow(t_cdf(1.0, 5.0), 3.0)) >= 5e-3);
}

TEST_CASE("two-sided identity rectangles match the radial mixture") {
    const std::vector<double> lower{-1.5, -1.5, -1.5, -1.5};
    const std::vector<double> upper{1.5, 1.5, 1.5, 1.5};
    MvtProblem p;
    p.correlation = identity(4);
    p.df = 8;
    p.lower = lower;
    p.upper = upper;
    const double oracle = radial_identity_oracle(lower, upper, 8);
    CHECK(std::fabs(mvt_rectangle(p).value - oracle) <= 5e-4);
}

TEST_CASE("the all-negative orthant has probability 2^-dim for any df") {
    for (std::size_t m : {2u, 3u, 4u}) {
        const std::vector<double> upper(m, 0.0);
        const ProbabilityEstimate est = mvt_rectangle(one_sided_problem(identity(m), upper, 5));
        CHECK(std::fabs(est.value - std::pow(2.0, -static_cast<double>(m))) <= 5e-4);
    }
}

TEST_CASE("bivariate rectangles match the single-integral reduction") {
    for (double rho : {-0.5, 0.0, 0.7}) {
        auto p = one_sided_problem(equicorrelated(2, rho), {1.0, 1.0}, 0);
        const ProbabilityEstimate est = mvt_rectangle(p);
        const double oracle = bivariate_normal_oracle(rho, -kInf, 1.0, -kInf, 1.0);
        CHECK(std::fabs(est.value - oracle) <= 5e-4);
    }
    // Asymmetric two-sided normal rectangle.
    MvtProblem p;
    p.correlation = equicorrelated(2, 0.4);
    p.df = 0;
    p.lower = {-0.5, -2.0};
    p.upper = {1.5, 0.8};
    const double oracle = bivariate_normal_oracle(0.4, -0.5, 1.5, -2.0, 0.8);
    CHECK(std::fabs(mvt_rectangle(p).value - oracle) <= 5e-4);
    // Correlated with finite df: radial-mixed bivariate oracle.
    auto pt = one_sided_problem(equicorrelated(2, -0.5), {1.0, 1.0}, 30);
    const double oracle_t = bivariate_t_oracle(-0.5, 1.0, 1.0, 30);
    CHECK(std::fabs(mvt_rectangle(pt).value - oracle_t) <= 5e-4);
}

TEST_CASE("rectangle estimates are monotone in the bounds") {
    double prev = -1.0;
    double prev_err = 0.0;
    for (double q : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        const auto est =
            mvt_rectangle(one_sided_problem(equicorrelated(3, -0.5), {q, q, q}, 12));
        CHECK(est.value + est.error_bound + prev_err >= prev);
        prev = est.value;
        prev_err = est.error_bound;
    }
}

TEST_CASE("rectangles are invariant under coordinate permutation") {
    const CorrelationMatrix R = contrast_correlation(williams_contrasts({10, 10, 10, 10}));
    std::vector<double> upper{0.8, 1.6, 2.4};
    auto p = one_sided_problem(R, upper, 36);
    const auto direct = mvt_rectangle(p);

    // Reverse the coordinate order.
    const std::size_t m = 3;
    MvtProblem q;
    q.df = 36;
    q.lower.assign(m, -kInf);
    q.upper.assign(m, 0.0);
    q.correlation = R;
    for (std::size_t i = 0; i < m; ++i) {
        q.upper[i] = upper[m - 1 - i];
        for (std::size_t j = 0; j < m; ++j)
            q.correlation.entries[i][j] = R.entries[m - 1 - i][m - 1 - j];
    }
    const auto reversed = mvt_rectangle(q);
    CHECK(std::fabs(direct.value - reversed.value) <=
          2.0 * (direct.error_bound + reversed.error_bound) + 1e-6);
}

TEST_CASE("identical problems give bit-identical results") {
    const auto p = one_sided_problem(equicorrelated(3, -0.5), {1.1, 2.2, 0.7}, 36);
    const auto a = mvt_rectangle(p);
    const auto b = mvt_rectangle(p);
    CHECK(a.value == b.value);
    CHECK(a.error_bound == b.error_bound);
}

TEST_CASE("univariate quantiles are exact inversions") {
    const CorrelationMatrix R1 = identity(1);
    CHECK(mvt_equicoordinate_quantile(0.975, R1, 4, Sides::OneSided) ==
          doctest::Approx(2.776445105).epsilon(1e-7));
    CHECK(mvt_equicoordinate_quantile(0.5, R1, 7, Sides::OneSided) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // Two-sided: P(|T| <= q) = 0.95 at df = 4 is the same classical value.
    CHECK(mvt_equicoordinate_quantile(0.95, R1, 4, Sides::TwoSided) ==
          doctest::Approx(2.776445105).epsilon(1e-7));
}

TEST_CASE("identity-correlation quantile matches the radial-oracle inversion") {
    // Invert P(max T <= q) = 0.95 for xi = 2, df = 30 on the oracle itself.
    const std::vector<double> lower(2, -kInf);
    double lo = 0.0, hi = 6.0;
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (radial_identity_oracle(lower, {mid, mid}, 30) < 0.95 ? lo : hi) = mid;
    }
    const double oracle_q = 0.5 * (lo + hi);
    const double q =
        mvt_equicoordinate_quantile(0.95, identity(2), 30, Sides::OneSided, 5e-4);
    CHECK(std::fabs(q - oracle_q) <= 3e-3);
}

TEST_CASE("grand-mean reference quantiles hit their pinned values") {
    // Balanced four-group design, singular grand-mean correlation; values
    // derived independently (and stable to the integrator tolerance).
    const CorrelationMatrix Rg = contrast_correlation(grand_mean_contrasts({10, 10, 10, 10}));
    CHECK(mvt_equicoordinate_quantile(0.95, Rg, 0, Sides::OneSided, 5e-4) ==
          doctest::Approx(2.2410).epsilon(2.5e-3));
    CHECK(mvt_equicoordinate_quantile(0.95, Rg, 0, Sides::TwoSided, 5e-4) ==
          doctest::Approx(2.4683).epsilon(2.5e-3));
    CHECK(mvt_equicoordinate_quantile(0.95, Rg, 36, Sides::OneSided, 5e-4) ==
          doctest::Approx(2.3387).epsilon(2.5e-3));
    const CorrelationMatrix Rw = contrast_correlation(williams_contrasts({10, 10, 10, 10}));
    CHECK(mvt_equicoordinate_quantile(0.95, Rw, 36, Sides::OneSided, 5e-4) ==
          doctest::Approx(1.9476).epsilon(2.5e-3));
}

TEST_CASE("two-sided quantile reproduces its defining probability") {
    const CorrelationMatrix R = equicorrelated(3, -0.4);
    const double q = mvt_equicoordinate_quantile(0.9, R, 20, Sides::TwoSided, 5e-4);
    MvtProblem p;
    p.correlation = R;
    p.df = 20;
    p.lower.assign(3, -q);
    p.upper.assign(3, q);
    CHECK(mvt_rectangle(p).value == doctest::Approx(0.9).epsilon(2.5e-3));
}

TEST_CASE("invalid problems raise the documented errors") {
    MvtProblem p = one_sided_problem(identity(2), {1.0, 1.0}, 5);
    p.lower[0] = 2.0;  // lower >= upper
    CHECK_THROWS_AS(mvt_rectangle(p), DataError);

    MvtProblem dims = one_sided_problem(identity(2), {1.0}, 5);
    CHECK_THROWS_AS(mvt_rectangle(dims), DataError);

    MvtProblem negdf = one_sided_problem(identity(2), {1.0, 1.0}, 5);
    negdf.df = -1;
    CHECK_THROWS_AS(mvt_rectangle(negdf), DataError);

    MvtProblem indefinite = one_sided_problem(equicorrelated(2, 1.5), {1.0, 1.0}, 5);
    CHECK_THROWS_AS(mvt_rectangle(indefinite), NumericError);

    MvtProblem huge = one_sided_problem(identity(14), std::vector<double>(14, 1.0), 5);
    CHECK_THROWS_AS(mvt_rectangle(huge), DataError);

    CHECK_THROWS_AS(mvt_equicoordinate_quantile(0.0, identity(2), 5, Sides::OneSided),
                    DataError);
    CHECK_THROWS_AS(mvt_equicoordinate_quantile(1.0, identity(2), 5, Sides::OneSided),
                    DataError);
    CHECK_THROWS_AS(
        mvt_equicoordinate_quantile(0.95, CorrelationMatrix{}, 5, Sides::OneSided),
        DataError);
}
