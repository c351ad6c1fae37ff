#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hct/normal_hybrid.hpp"
#include "hct/numerics.hpp"

using namespace hct;

namespace {

NormalDesign design20() {
    NormalDesign d;
    d.n_C = d.n_T = 20;
    d.sigma = 1.0;
    d.delta0 = 0.0;
    d.gamma = 0.025;
    d.kappa = 0.025;
    return d;
}

// informative prior with data-to-prior variance ratio 0.5 (n0_C = 10)
NormalPrior prior_half() { return NormalPrior::from_effective_size(0.0, 1.0, 10.0); }

// independent conjugate-update oracle: update the control mean, then subtract
DeltaPosterior conjugate_oracle(const NormalDesign& d, const NormalPrior& p,
                                const TwoArmNormalData& y) {
    const double prec0 = 1.0 / (p.sigma_C * p.sigma_C);
    const double prec_data = d.n_C / (d.sigma * d.sigma);
    const double post_var = 1.0 / (prec0 + prec_data);
    const double post_mean = (p.mu_C * prec0 + y.ybar_C * prec_data) * post_var;
    return {y.ybar_T - post_mean, std::sqrt(d.sigma * d.sigma / d.n_T + post_var)};
}

double bisect_on_kappa_bd(const NormalDesign& d, const NormalPrior& p, double target) {
    double lo = p.mu_C - 6.0, hi = p.mu_C + 6.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kappa_bd(d, p, mid) > target ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("posterior_delta") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();

    SUBCASE("flat prior reduces to the z-test geometry") {
        const DeltaPosterior post =
            posterior_delta(d, NormalPrior::flat(), {0.3, 0.8});
        CHECK(post.mean == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(post.sd == doctest::Approx(std::sqrt(0.1)).epsilon(1e-15));
    }
    SUBCASE("matches the conjugate-update oracle") {
        const TwoArmNormalData y{0.3, 0.8};
        const DeltaPosterior post = posterior_delta(d, p, y);
        const DeltaPosterior want = conjugate_oracle(d, p, y);
        CHECK(post.mean == doctest::Approx(want.mean).epsilon(1e-13));
        CHECK(post.sd == doctest::Approx(want.sd).epsilon(1e-13));
        CHECK(post.mean == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(post.sd == doctest::Approx(0.288675).epsilon(1e-6));
    }
    SUBCASE("no shrinkage shift at zero conflict") {
        const DeltaPosterior post = posterior_delta(d, p, {p.mu_C, 1.4});
        CHECK(post.mean == doctest::Approx(1.4 - p.mu_C).epsilon(1e-14));
    }
}

TEST_CASE("bd_decision") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();

    SUBCASE("posterior probability and rejection") {
        const BayesDecision dec = bd_decision(d, p, {0.3, 0.8});
        CHECK(dec.prob_null ==
              doctest::Approx(std_normal_cdf(-0.6 / std::sqrt(1.0 / 12.0))).epsilon(1e-12));
        CHECK(dec.prob_null == doctest::Approx(0.0188).epsilon(1e-3));
        CHECK(dec.reject);
    }
    SUBCASE("simulation cross-check of the posterior probability") {
        const DeltaPosterior post = posterior_delta(d, p, {0.3, 0.8});
        const std::size_t reps = 1000000;
        const auto draws = draw_normal(RngStream{99, 0}, post.mean, post.sd, reps);
        std::size_t below = 0;
        for (double v : draws)
            if (v <= d.delta0) ++below;
        const double est = static_cast<double>(below) / reps;
        const double p_exact = bd_decision(d, p, {0.3, 0.8}).prob_null;
        const double se = std::sqrt(p_exact * (1.0 - p_exact) / reps);
        CHECK(std::fabs(est - p_exact) < 4.0 * se);
    }
    SUBCASE("flat prior with gamma = kappa equals the z-test") {
        NormalDesign d2 = d;
        d2.gamma = d2.kappa = 0.05;
        const NormalPrior flat = NormalPrior::flat();
        for (double yT : {-0.5, 0.0, 0.3, 0.52, 0.9})
            CHECK(bd_decision(d2, flat, {0.0, yT}).reject ==
                  freq_decision(d2, {0.0, yT}, d2.kappa));
    }
    SUBCASE("posterior mean at the margin never rejects at gamma < 0.5") {
        NormalDesign d2 = d;
        d2.gamma = 0.49;
        const BayesDecision dec = bd_decision(d2, p, {0.0, 0.0});
        CHECK(dec.prob_null == doctest::Approx(0.5).epsilon(1e-12));
        CHECK_FALSE(dec.reject);
    }
}

TEST_CASE("kappa_bd values and decision parity") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();

    CHECK(kappa_bd(d, NormalPrior::flat(), 1.7) ==
          doctest::Approx(d.gamma).epsilon(1e-14));
    CHECK(kappa_bd(d, p, 0.0) == doctest::Approx(0.0368).epsilon(2e-3));
    CHECK(kappa_bd(d, p, 1.0) == doctest::Approx(0.2311).epsilon(1e-3));

    // parity: the z-test at kappa_bd reproduces the Bayes decision for any yT
    for (double ybar_C : {-1.0, -0.2, 0.0, 0.5, 1.3}) {
        const double k = kappa_bd(d, p, ybar_C);
        for (double ybar_T = -2.0; ybar_T <= 2.0; ybar_T += 0.01) {
            const TwoArmNormalData y{ybar_C, ybar_T};
            CHECK(freq_decision(d, y, k) == bd_decision(d, p, y).reject);
        }
    }
}

TEST_CASE("kappa_bd monotone increasing in the control mean under borrowing") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();
    double prev = 0.0;
    bool first = true;
    for (double y = -4.0; y <= 4.0; y += 0.01) {
        const double k = kappa_bd(d, p, y);
        if (!first) CHECK(k > prev);
        prev = k;
        first = false;
    }
}

TEST_CASE("gamma_fd values, parity, and round trip") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();

    CHECK(gamma_fd(d, NormalPrior::flat(), -0.4, 0.025) ==
          doctest::Approx(0.025).epsilon(1e-14));
    CHECK(gamma_fd(d, p, 0.0, 0.025) == doctest::Approx(0.0159).epsilon(1e-2));

    // parity with the z-test at fixed level
    for (double ybar_C : {-0.7, 0.0, 0.9}) {
        const double g = gamma_fd(d, p, ybar_C, d.kappa);
        NormalDesign dg = d;
        dg.gamma = g;
        for (double ybar_T = -2.0; ybar_T <= 2.0; ybar_T += 0.01) {
            const TwoArmNormalData y{ybar_C, ybar_T};
            CHECK(bd_decision(dg, p, y).reject == freq_decision(d, y, d.kappa));
        }
    }

    // the two threshold maps invert each other
    const RngStream rng{2024, 5};
    for (int i = 0; i < 200; ++i) {
        const double ybar_C = -2.0 + 4.0 * rng.uniform(2 * i);
        const double kap = 0.005 + 0.4 * rng.uniform(2 * i + 1);
        const double g = gamma_fd(d, p, ybar_C, kap);
        CHECK(kappa_bd(d, p, ybar_C, g) == doctest::Approx(kap).epsilon(1e-12));
    }
}

TEST_CASE("cdc_threshold clamps") {
    CompromiseConfig cfg;
    CHECK(cdc_threshold(0.10, cfg) == 0.075);
    CHECK(cdc_threshold(0.005, cfg) == 0.01);
    CHECK(cdc_threshold(0.03, cfg) == 0.03);
    CompromiseConfig bad;
    bad.alpha_low = 0.2;
    bad.alpha_up = 0.1;
    CHECK_THROWS_AS(cdc_threshold(0.03, bad), std::invalid_argument);
}

TEST_CASE("conflict_bounds") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();
    CompromiseConfig cfg;

    const ConflictBounds b = conflict_bounds(d, p, cfg);
    CHECK(b.ybar_up == doctest::Approx(bisect_on_kappa_bd(d, p, cfg.alpha_up)).epsilon(1e-9));
    CHECK(b.ybar_low == doctest::Approx(bisect_on_kappa_bd(d, p, cfg.alpha_low)).epsilon(1e-9));
    CHECK(kappa_bd(d, p, b.ybar_up) == doctest::Approx(cfg.alpha_up).epsilon(1e-10));
    CHECK(kappa_bd(d, p, b.ybar_low) == doctest::Approx(cfg.alpha_low).epsilon(1e-10));
    CHECK(b.ybar_up == doctest::Approx(0.33172).epsilon(1e-4));
    CHECK(b.ybar_low == doctest::Approx(-0.50959).epsilon(1e-4));

    CHECK_THROWS_AS(conflict_bounds(d, NormalPrior::flat(), cfg), std::domain_error);
}

TEST_CASE("equal_threshold_point") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();

    const double pt = equal_threshold_point(d, p);
    CHECK(pt == doctest::Approx(bisect_on_kappa_bd(d, p, d.gamma)).epsilon(1e-9));
    CHECK(pt == doctest::Approx(-0.16201).epsilon(1e-4));
    CHECK(kappa_bd(d, p, pt) == doctest::Approx(d.gamma).epsilon(1e-10));
    CHECK(pt < p.mu_C);

    NormalDesign half = d;
    half.gamma = 0.5;
    CHECK(equal_threshold_point(half, p) == doctest::Approx(p.mu_C).epsilon(1e-12));

    // below the prior mean for any gamma < 0.5 and active borrowing
    for (double g : {0.01, 0.1, 0.3, 0.49}) {
        NormalDesign dg = d;
        dg.gamma = g;
        CHECK(equal_threshold_point(dg, p) < p.mu_C);
    }
    CHECK_THROWS_AS(equal_threshold_point(d, NormalPrior::flat()), std::domain_error);
}

TEST_CASE("cdd_weight") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();
    CompromiseConfig cfg;

    CHECK(cdd_weight(d, p, p.mu_C, cfg) == 0.0);
    const double scale = cfg.t * std::sqrt(d.var_C() + p.sigma_C * p.sigma_C);
    CHECK(cdd_weight(d, p, p.mu_C + scale, cfg) == 1.0);
    CHECK(cdd_weight(d, p, p.mu_C + 2.0 * scale, cfg) == 1.0);
    CHECK(cdd_weight(d, p, p.mu_C + 0.5 * scale, cfg) ==
          doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(cdd_weight(d, p, p.mu_C + 0.774597, cfg) ==
          doctest::Approx(0.0625).epsilon(1e-5));

    SUBCASE("optional freeze below the prior mean") {
        CompromiseConfig frozen = cfg;
        frozen.freeze_w_below_mean = true;
        // between the equal-threshold point and the prior mean the adjusted
        // threshold exceeds kappa while conflict is negative
        const double inside = 0.5 * equal_threshold_point(d, p);
        CHECK(kappa_bd(d, p, inside) >= d.kappa);
        CHECK(cdd_weight(d, p, inside, cfg) > 0.0);
        CHECK(cdd_weight(d, p, inside, frozen) == 0.0);
        // unaffected above the mean
        CHECK(cdd_weight(d, p, 0.3, frozen) == cdd_weight(d, p, 0.3, cfg));
    }
}

TEST_CASE("cdd_threshold") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();
    CompromiseConfig cfg;

    SUBCASE("zero weight reduces to the clamped threshold") {
        const double v = cdd_threshold(d, p, p.mu_C, cfg);
        CHECK(v == doctest::Approx(cdc_threshold(kappa_bd(d, p, p.mu_C), cfg)).epsilon(1e-14));
    }
    SUBCASE("full weight reduces to kappa inside the band") {
        const double scale = cfg.t * std::sqrt(d.var_C() + p.sigma_C * p.sigma_C);
        CHECK(cdd_threshold(d, p, p.mu_C + 1.5 * scale, cfg) ==
              doctest::Approx(d.kappa).epsilon(1e-14));
    }
    SUBCASE("log-space interpolation then clamp") {
        const double ybar_C = 1.0;
        const double kbd = kappa_bd(d, p, ybar_C);
        const double w = cdd_weight(d, p, ybar_C, cfg);
        CHECK(w == doctest::Approx(0.173611).epsilon(1e-5));
        const double raw = std::exp(w * std::log(d.kappa) + (1.0 - w) * std::log(kbd));
        CHECK(raw == doctest::Approx(0.1571).epsilon(1e-3));
        CHECK(raw > cfg.alpha_up);
        CHECK(cdd_threshold(d, p, ybar_C, cfg) == cfg.alpha_up);
    }
    SUBCASE("always inside the band") {
        for (double y = -5.0; y <= 5.0; y += 0.05) {
            const double v = cdd_threshold(d, p, y, cfg);
            CHECK(v >= cfg.alpha_low);
            CHECK(v <= cfg.alpha_up);
        }
    }
}

TEST_CASE("gamma_cd inverts the adjusted threshold") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();

    for (double ybar_C : {-1.2, -0.1, 0.4, 2.0}) {
        const double kbd = kappa_bd(d, p, ybar_C);
        CHECK(gamma_cd(d, p, ybar_C, kbd) == doctest::Approx(d.gamma).epsilon(1e-12));
    }
    CHECK(gamma_cd(d, NormalPrior::flat(), 0.7, 0.033) ==
          doctest::Approx(0.033).epsilon(1e-14));
}

TEST_CASE("degenerate band makes the constrained rule the borrowing rule") {
    const NormalDesign d = design20();
    const NormalPrior p = prior_half();
    CompromiseConfig wide;
    wide.alpha_low = 1e-12;
    wide.alpha_up = 1.0 - 1e-12;
    const RngStream rng{31, 8};
    for (int i = 0; i < 500; ++i) {
        const double ybar_C = -3.0 + 6.0 * rng.uniform(3 * i);
        const double ybar_T = -3.0 + 6.0 * rng.uniform(3 * i + 1);
        const double k = cdc_threshold(kappa_bd(d, p, ybar_C), wide);
        CHECK(freq_decision(d, {ybar_C, ybar_T}, k) ==
              bd_decision(d, p, {ybar_C, ybar_T}).reject);
    }
}

TEST_CASE("dual consistency across rules on random data") {
    const RngStream rng{77, 3};
    CompromiseConfig cfg;
    for (int i = 0; i < 2000; ++i) {
        NormalDesign d;
        d.n_C = 5 + static_cast<int>(rng.uniform(9 * i) * 100);
        d.n_T = 5 + static_cast<int>(rng.uniform(9 * i + 1) * 100);
        d.sigma = 0.5 + rng.uniform(9 * i + 2);
        d.gamma = 0.01 + 0.2 * rng.uniform(9 * i + 3);
        d.kappa = 0.01 + 0.2 * rng.uniform(9 * i + 4);
        const NormalPrior p = NormalPrior::from_effective_size(
            -1.0 + 2.0 * rng.uniform(9 * i + 5), d.sigma,
            1.0 + 50.0 * rng.uniform(9 * i + 6));
        const double ybar_C = p.mu_C - 2.5 + 5.0 * rng.uniform(9 * i + 7);
        const double ybar_T = ybar_C - 2.0 + 4.0 * rng.uniform(9 * i + 8);
        const TwoArmNormalData y{ybar_C, ybar_T};

        const double thresholds[3] = {kappa_bd(d, p, ybar_C),
                                      cdc_threshold(kappa_bd(d, p, ybar_C), cfg),
                                      cdd_threshold(d, p, ybar_C, cfg)};
        for (const double k : thresholds) {
            const double g = gamma_cd(d, p, ybar_C, k);
            NormalDesign dg = d;
            dg.gamma = g;
            CHECK(freq_decision(d, y, k) == bd_decision(dg, p, y).reject);
        }
    }
}

TEST_CASE("validation") {
    NormalDesign d = design20();
    d.gamma = 0.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = design20();
    d.n_C = 0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    NormalPrior p;
    p.sigma_C = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    CHECK_NOTHROW(NormalPrior::flat().validate());
    TwoArmNormalData y{std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_THROWS_AS(y.validate(), std::invalid_argument);
}
