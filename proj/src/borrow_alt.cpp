#include "hct/borrow_alt.hpp"

#include <cmath>
#include <stdexcept>

#include "hct/numerics.hpp"

namespace hct {

void PowerPriorSpec::validate() const {
    base.validate();
    if (!(zeta >= 0.0 && zeta <= 1.0))
        throw std::invalid_argument("PowerPriorSpec: zeta must be in [0, 1]");
}

MixturePrior MixturePrior::unit_information(const NormalPrior& informative,
                                            const NormalDesign& design,
                                            double weight) {
    MixturePrior m;
    m.weight = weight;
    m.informative = informative;
    m.robust.mu_C = informative.mu_C;
    m.robust.sigma_C = design.sigma;
    return m;
}

void MixturePrior::validate() const {
    if (!(weight >= 0.0 && weight <= 1.0))
        throw std::invalid_argument("MixturePrior: weight must be in [0, 1]");
    informative.validate();
    robust.validate();
    if (!informative.is_flat() && !robust.is_flat() &&
        robust.sigma_C < informative.sigma_C)
        throw std::invalid_argument(
            "MixturePrior: robust component must not be tighter than the informative one");
}

double pp_threshold(const NormalDesign& design, const PowerPriorSpec& spec,
                    double ybar_C) {
    return pp_threshold(design, spec, ybar_C, design.gamma);
}

double pp_threshold(const NormalDesign& design, const PowerPriorSpec& spec,
                    double ybar_C, double gamma) {
    spec.validate();
    const double az = spec.base.variance_ratio(design) * spec.zeta;
    const double z = ((spec.base.mu_C - ybar_C) * (az / (1.0 + az)) +
                      std_normal_quantile(1.0 - gamma) *
                          std::sqrt(design.var_C() / (1.0 + az) + design.var_T())) /
                     design.sd_freq();
    return 1.0 - std_normal_cdf(z);
}

double eb_zeta(const NormalDesign& design, const NormalPrior& prior, double ybar_C) {
    if (!(prior.variance_ratio(design) > 0.0))
        throw std::domain_error("eb_zeta: requires an informative prior");
    // The marginal variance var_C + sigma_C^2 / zeta is matched to the squared
    // conflict; below the attainable minimum the optimum sits at full borrowing.
    const double d2 = (ybar_C - prior.mu_C) * (ybar_C - prior.mu_C);
    const double sigma_C2 = prior.sigma_C * prior.sigma_C;
    if (d2 <= design.var_C() + sigma_C2) return 1.0;
    const double zeta = sigma_C2 / (d2 - design.var_C());
    return std::min(zeta, 1.0);
}

double ebpow_threshold(const NormalDesign& design, const NormalPrior& prior,
                       double ybar_C) {
    return ebpow_threshold(design, prior, ybar_C, design.gamma);
}

double ebpow_threshold(const NormalDesign& design, const NormalPrior& prior,
                       double ybar_C, double gamma) {
    PowerPriorSpec spec;
    spec.base = prior;
    spec.zeta = eb_zeta(design, prior, ybar_C);
    return pp_threshold(design, spec, ybar_C, gamma);
}

MixturePosterior rm_posterior(const NormalDesign& design, const MixturePrior& prior,
                              double ybar_C) {
    prior.validate();
    const NormalPrior* comps[2] = {&prior.informative, &prior.robust};
    const double prior_w[2] = {prior.weight, 1.0 - prior.weight};

    MixturePosterior post;
    double logw[2];
    for (int i = 0; i < 2; ++i) {
        const double a = comps[i]->variance_ratio(design);
        post.components[i].mean = (comps[i]->mu_C * a + ybar_C) / (1.0 + a);
        post.components[i].sd = std::sqrt(design.var_C() / (1.0 + a));
        if (prior_w[i] <= 0.0) {
            logw[i] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const double sigma_C2 =
            comps[i]->is_flat() ? std::numeric_limits<double>::infinity()
                                : comps[i]->sigma_C * comps[i]->sigma_C;
        const double marg_var = design.var_C() + sigma_C2;
        const double resid = ybar_C - comps[i]->mu_C;
        logw[i] = std::log(prior_w[i]) - 0.5 * std::log(marg_var) -
                  0.5 * resid * resid / marg_var;
    }
    const double m = std::max(logw[0], logw[1]);
    const double e0 = std::exp(logw[0] - m);
    const double e1 = std::exp(logw[1] - m);
    post.weights[0] = e0 / (e0 + e1);
    post.weights[1] = e1 / (e0 + e1);
    return post;
}

double rm_prob_null(const NormalDesign& design, const MixturePrior& prior,
                    const TwoArmNormalData& data) {
    const MixturePosterior post = rm_posterior(design, prior, data.ybar_C);
    double p = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double mean_delta = data.ybar_T - post.components[i].mean;
        const double sd_delta = std::sqrt(design.var_T() + post.components[i].sd *
                                                               post.components[i].sd);
        p += post.weights[i] *
             std_normal_cdf((design.delta0 - mean_delta) / sd_delta);
    }
    return p;
}

double rm_critical_value(const NormalDesign& design, const MixturePrior& prior,
                         double ybar_C) {
    return rm_critical_value(design, prior, ybar_C, design.gamma);
}

double rm_critical_value(const NormalDesign& design, const MixturePrior& prior,
                         double ybar_C, double gamma) {
    // The posterior probability of the null is strictly decreasing in ybar_T
    // (every mixture component has positive spread), so the rejection frontier
    // is the unique root of prob_null(ybar_T) - gamma.
    const MixturePosterior post = rm_posterior(design, prior, ybar_C);
    const auto prob_null = [&](double ybar_T) {
        double p = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double sd_delta = std::sqrt(
                design.var_T() + post.components[i].sd * post.components[i].sd);
            p += post.weights[i] *
                 std_normal_cdf((design.delta0 - ybar_T + post.components[i].mean) /
                                sd_delta);
        }
        return p - gamma;
    };

    const double sd_delta_max =
        std::sqrt(design.var_T() + design.var_C());
    double lo = ybar_C + design.delta0 - 10.0 * sd_delta_max;
    double hi = ybar_C + design.delta0 + 10.0 * sd_delta_max;
    // widen geometrically until the root is bracketed
    for (int attempt = 0; attempt < 60 && prob_null(lo) <= 0.0; ++attempt)
        lo -= (hi - lo);
    for (int attempt = 0; attempt < 60 && prob_null(hi) >= 0.0; ++attempt)
        hi += (hi - lo);
    if (prob_null(lo) <= 0.0 || prob_null(hi) >= 0.0)
        throw std::runtime_error(
            "rm_critical_value: could not bracket the rejection frontier");

    Tolerance tol;
    tol.abs_tol = 1e-10;
    tol.max_iter = 400;
    const double ybar_T_star = find_root(prob_null, lo, hi, tol);
    return (ybar_T_star - ybar_C - design.delta0) / design.sd_freq();
}

double rm_threshold(const NormalDesign& design, const MixturePrior& prior,
                    double ybar_C) {
    return rm_threshold(design, prior, ybar_C, design.gamma);
}

double rm_threshold(const NormalDesign& design, const MixturePrior& prior,
                    double ybar_C, double gamma) {
    return 1.0 - std_normal_cdf(rm_critical_value(design, prior, ybar_C, gamma));
}

}  // namespace hct
