#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hct/numerics.hpp"

using namespace hct;

namespace {

// Independent high-precision oracle for the normal CDF: Taylor series around 0
// for moderate arguments, Mills-ratio continued fraction in the lower tail.
double phi_oracle(double x) {
    if (x > 6.0) return 1.0 - phi_oracle(-x);
    if (x >= -6.0) {
        double term = x;
        double sum = x;
        for (int k = 1; k < 400; ++k) {
            term *= x * x / (2.0 * k + 1.0);
            sum += term;
            if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
        }
        return 0.5 + std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI) * sum;
    }
    const double t = -x;
    double cf = 0.0;
    for (int k = 60; k >= 1; --k) cf = k / (t + cf);
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI) / (t + cf);
}

}  // namespace

TEST_CASE("std_normal_cdf matches the series/continued-fraction oracle") {
    CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std_normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-6));
    for (double x = -8.0; x <= 8.0; x += 0.25)
        CHECK(std_normal_cdf(x) == doctest::Approx(phi_oracle(x)).epsilon(1e-13));
}

TEST_CASE("std_normal_cdf symmetry and monotonicity") {
    double prev = -1.0;
    for (double x = -8.0; x <= 8.0 + 1e-12; x += 1.0) {
        CHECK(std_normal_cdf(x) + std_normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-15));
        const double v = std_normal_cdf(x);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::quiet_NaN()),
                    std::domain_error);
    CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::infinity()),
                    std::domain_error);
}

TEST_CASE("std_normal_quantile") {
    CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));

    // oracle: bisection on the cdf
    double lo = 0.0, hi = 8.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std_normal_cdf(mid) > 0.975 ? hi : lo) = mid;
    }
    CHECK(std_normal_quantile(0.975) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
    CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));

    // the upper tail loses resolution once p is stored as 1 - tiny, so the
    // round-trip guarantee tightens with distance from the right edge
    for (double x = -6.0; x <= 5.0 + 1e-12; x += 0.5)
        CHECK(std::fabs(std_normal_quantile(std_normal_cdf(x)) - x) < 1e-9);
    for (double x = 5.5; x <= 6.0 + 1e-12; x += 0.5)
        CHECK(std::fabs(std_normal_quantile(std_normal_cdf(x)) - x) < 1e-7);
    for (double p : {1e-10, 1e-4, 0.2, 0.8, 1.0 - 1e-4})
        CHECK(std_normal_cdf(std_normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));

    CHECK_THROWS_AS(std_normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(-0.3), std::domain_error);
}

TEST_CASE("log_gamma") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-14));
    CHECK(log_gamma(10.0) == doctest::Approx(std::log(362880.0)).epsilon(1e-12));
    CHECK(log_gamma(10.0) == doctest::Approx(12.8018275).epsilon(1e-6));
    double fact = 1.0;
    for (int n = 1; n <= 15; ++n) {
        fact *= n;
        CHECK(std::exp(log_gamma(n + 1.0)) == doctest::Approx(fact).epsilon(1e-9));
    }
    CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
    CHECK_THROWS_AS(log_gamma(-2.0), std::domain_error);
}

TEST_CASE("incomplete_beta basic identities") {
    CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(incomplete_beta(2.0, 1.0, 0.3) == doctest::Approx(0.09).epsilon(1e-13));
    CHECK(incomplete_beta(1.0, 2.0, 0.3) == doctest::Approx(1.0 - 0.49).epsilon(1e-13));
    CHECK(incomplete_beta(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-13));
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    for (double x : {0.05, 0.35, 0.8})
        CHECK(incomplete_beta(3.5, 7.25, x) ==
              doctest::Approx(1.0 - incomplete_beta(7.25, 3.5, 1.0 - x)).epsilon(1e-13));
    CHECK(incomplete_beta(4.0, 9.0, 0.0) == 0.0);
    CHECK(incomplete_beta(4.0, 9.0, 1.0) == 1.0);
}

TEST_CASE("integrate on smooth integrands") {
    Tolerance tol;
    CHECK(integrate([](double x) { return x; }, 0.0, 1.0, tol) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(integrate([](double x) { return x * x * x * x; }, 0.0, 2.0, tol) ==
          doctest::Approx(6.4).epsilon(1e-12));
    CHECK(integrate([](double x) { return std_normal_pdf(x); }, -8.0, 8.0, tol) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("integrate error paths") {
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0, Tolerance{}),
                    std::invalid_argument);
    Tolerance tight;
    tight.abs_tol = 1e-14;
    tight.rel_tol = 0.0;
    tight.max_iter = 3;  // starve the subdivision budget
    try {
        integrate([](double x) { return std::sqrt(std::fabs(x)); }, -1.0, 1.0, tight);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.estimate() == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
    }
}

TEST_CASE("integrate handles integrable endpoint singularities") {
    Tolerance tol;
    tol.abs_tol = 1e-10;
    tol.max_iter = 4000;
    CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, tol) ==
          doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("find_root") {
    Tolerance tol;
    tol.abs_tol = 1e-12;
    CHECK(find_root([](double x) { return x - 2.0; }, 0.0, 5.0, tol) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(find_root([](double x) { return std_normal_cdf(x) - 0.975; }, 0.0, 5.0, tol) ==
          doctest::Approx(1.959964).epsilon(1e-6));
    CHECK_THROWS_AS(find_root([](double x) { return x * x; }, -1.0, 1.0, tol),
                    BracketingError);
    // determinism
    const auto f = [](double x) { return std::sin(x) - 0.4; };
    const double a = find_root(f, 0.0, 1.5, tol);
    const double b = find_root(f, 0.0, 1.5, tol);
    CHECK(a == b);
}

TEST_CASE("draw_normal reproducibility and moments") {
    const RngStream stream{123456789ULL, 42ULL};
    const auto a = draw_normal(stream, 0.0, 1.0, 1000);
    const auto b = draw_normal(stream, 0.0, 1.0, 1000);
    CHECK(a == b);

    const std::size_t n = 1000000;
    const auto big = draw_normal(stream, 0.0, 1.0, n);
    double mean = 0.0;
    for (double v : big) mean += v;
    mean /= n;
    CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    double var = 0.0;
    for (double v : big) var += (v - mean) * (v - mean);
    var /= n - 1;
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));

    CHECK_THROWS_AS(draw_normal(stream, 0.0, -1.0, 10), std::domain_error);
    CHECK_THROWS_AS(draw_normal(stream, 0.0, 0.0, 10), std::domain_error);
}

TEST_CASE("distinct streams decorrelate") {
    const RngStream s1{7ULL, 0ULL};
    const RngStream s2{7ULL, 1ULL};
    const std::size_t n = 100000;
    const auto a = draw_normal(s1, 0.0, 1.0, n);
    const auto b = draw_normal(s2, 0.0, 1.0, n);
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += a[i] * b[i];
    CHECK(std::fabs(dot / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    // substream derivation is deterministic and distinct
    CHECK(s1.substream(3).uniform(0) == s1.substream(3).uniform(0));
    CHECK(s1.substream(3).uniform(0) != s1.substream(4).uniform(0));
}

TEST_CASE("Tolerance validation") {
    Tolerance bad;
    bad.abs_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = Tolerance{};
    bad.max_iter = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = Tolerance{};
    bad.rel_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
