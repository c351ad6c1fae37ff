#include "hct/normal_hybrid.hpp"

#include <cmath>
#include <stdexcept>

#include "hct/numerics.hpp"

namespace hct {

double NormalDesign::sd_freq() const { return std::sqrt(var_C() + var_T()); }

void NormalDesign::validate() const {
    if (n_C < 1 || n_T < 1)
        throw std::invalid_argument("NormalDesign: sample sizes must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("NormalDesign: sigma must be > 0");
    if (!std::isfinite(delta0))
        throw std::invalid_argument("NormalDesign: delta0 must be finite");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("NormalDesign: gamma must be in (0, 1)");
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("NormalDesign: kappa must be in (0, 1)");
}

NormalPrior NormalPrior::flat(double mu) {
    NormalPrior p;
    p.mu_C = mu;
    return p;
}

NormalPrior NormalPrior::from_effective_size(double mu, double sigma, double n0_C) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("NormalPrior: sigma must be > 0");
    if (!(n0_C >= 0.0))
        throw std::invalid_argument("NormalPrior: n0_C must be >= 0");
    NormalPrior p;
    p.mu_C = mu;
    if (n0_C > 0.0) p.sigma_C = sigma / std::sqrt(n0_C);
    return p;
}

double NormalPrior::variance_ratio(const NormalDesign& design) const {
    if (is_flat()) return 0.0;
    return design.sigma * design.sigma / (design.n_C * sigma_C * sigma_C);
}

void NormalPrior::validate() const {
    if (!std::isfinite(mu_C)) throw std::invalid_argument("NormalPrior: mu_C must be finite");
    if (!is_flat() && !(sigma_C > 0.0))
        throw std::invalid_argument("NormalPrior: sigma_C must be > 0 or flat");
}

void TwoArmNormalData::validate() const {
    if (!std::isfinite(ybar_C) || !std::isfinite(ybar_T))
        throw std::invalid_argument("TwoArmNormalData: means must be finite");
}

void CompromiseConfig::validate() const {
    if (!(alpha_low > 0.0 && alpha_low < alpha_up && alpha_up < 1.0))
        throw std::invalid_argument("CompromiseConfig: need 0 < alpha_low < alpha_up < 1");
    if (!(t > 0.0)) throw std::invalid_argument("CompromiseConfig: t must be > 0");
    if (!(p >= 0.0)) throw std::invalid_argument("CompromiseConfig: p must be >= 0");
}

namespace {

// sd of the delta posterior: sqrt(var_T + var_C / (1 + A))
double posterior_sd(const NormalDesign& d, double ratio) {
    return std::sqrt(d.var_T() + d.var_C() / (1.0 + ratio));
}

}  // namespace

DeltaPosterior posterior_delta(const NormalDesign& design, const NormalPrior& prior,
                               const TwoArmNormalData& data) {
    const double a = prior.variance_ratio(design);
    DeltaPosterior post;
    post.mean = data.ybar_T - (prior.mu_C * a + data.ybar_C) / (1.0 + a);
    post.sd = posterior_sd(design, a);
    return post;
}

BayesDecision bd_decision(const NormalDesign& design, const NormalPrior& prior,
                          const TwoArmNormalData& data) {
    const DeltaPosterior post = posterior_delta(design, prior, data);
    BayesDecision d;
    d.prob_null = std_normal_cdf((design.delta0 - post.mean) / post.sd);
    d.reject = d.prob_null <= design.gamma;
    return d;
}

bool freq_decision(const NormalDesign& design, const TwoArmNormalData& data,
                   double kappa) {
    if (kappa <= 0.0) return false;
    if (kappa >= 1.0) return true;
    const double z = (data.ybar_T - data.ybar_C - design.delta0) / design.sd_freq();
    return z > std_normal_quantile(1.0 - kappa);
}

double kappa_bd(const NormalDesign& design, const NormalPrior& prior, double ybar_C) {
    return kappa_bd(design, prior, ybar_C, design.gamma);
}

double kappa_bd(const NormalDesign& design, const NormalPrior& prior, double ybar_C,
                double gamma) {
    const double a = prior.variance_ratio(design);
    const double shrink = a / (1.0 + a);
    const double z = ((prior.mu_C - ybar_C) * shrink +
                      std_normal_quantile(1.0 - gamma) * posterior_sd(design, a)) /
                     design.sd_freq();
    return 1.0 - std_normal_cdf(z);
}

double gamma_fd(const NormalDesign& design, const NormalPrior& prior, double ybar_C,
                double kappa) {
    // degenerate levels map to degenerate posterior thresholds: the Bayes test
    // at 0 never rejects, at 1 always rejects
    if (kappa <= 0.0) return 0.0;
    if (kappa >= 1.0) return 1.0;
    const double a = prior.variance_ratio(design);
    const double shrink = a / (1.0 + a);
    const double z = (std_normal_quantile(1.0 - kappa) * design.sd_freq() +
                      (ybar_C - prior.mu_C) * shrink) /
                     posterior_sd(design, a);
    return 1.0 - std_normal_cdf(z);
}

double cdc_threshold(double kappa_bd_value, const CompromiseConfig& cfg) {
    cfg.validate();
    return std::max(std::min(kappa_bd_value, cfg.alpha_up), cfg.alpha_low);
}

ConflictBounds conflict_bounds(const NormalDesign& design, const NormalPrior& prior,
                               const CompromiseConfig& cfg) {
    cfg.validate();
    const double a = prior.variance_ratio(design);
    if (!(a > 0.0))
        throw std::domain_error("conflict_bounds: undefined for a flat prior");
    const double sd_post = posterior_sd(design, a);
    const double zg = std_normal_quantile(1.0 - design.gamma);
    const double scale = (1.0 + a) / a;
    ConflictBounds b;
    b.ybar_up = prior.mu_C -
                (std_normal_quantile(1.0 - cfg.alpha_up) * design.sd_freq() -
                 zg * sd_post) * scale;
    b.ybar_low = prior.mu_C -
                 (std_normal_quantile(1.0 - cfg.alpha_low) * design.sd_freq() -
                  zg * sd_post) * scale;
    return b;
}

double equal_threshold_point(const NormalDesign& design, const NormalPrior& prior) {
    const double a = prior.variance_ratio(design);
    if (!(a > 0.0))
        throw std::domain_error("equal_threshold_point: undefined for a flat prior");
    const double zg = std_normal_quantile(1.0 - design.gamma);
    return prior.mu_C -
           zg * (design.sd_freq() - posterior_sd(design, a)) * (1.0 + a) / a;
}

double cdd_weight(const NormalDesign& design, const NormalPrior& prior, double ybar_C,
                  const CompromiseConfig& cfg) {
    cfg.validate();
    if (cfg.freeze_w_below_mean && ybar_C <= prior.mu_C &&
        kappa_bd(design, prior, ybar_C) >= design.kappa)
        return 0.0;
    const double sigma_C2 = prior.is_flat() ? 0.0 : prior.sigma_C * prior.sigma_C;
    const double scale = cfg.t * std::sqrt(design.var_C() + sigma_C2);
    const double ratio = std::fabs(ybar_C - prior.mu_C) / scale;
    if (ratio >= 1.0) return 1.0;
    return std::pow(ratio, cfg.p);  // pow(x, 0) == 1: p = 0 discards everywhere
}

double cdd_threshold(const NormalDesign& design, const NormalPrior& prior,
                     double ybar_C, const CompromiseConfig& cfg) {
    return cdd_threshold(design, prior, ybar_C, cfg, design.gamma);
}

double cdd_threshold(const NormalDesign& design, const NormalPrior& prior,
                     double ybar_C, const CompromiseConfig& cfg, double gamma) {
    const double kbd = kappa_bd(design, prior, ybar_C, gamma);
    const double w = cdd_weight(design, prior, ybar_C, cfg);
    // geometric interpolation in log space: kappa^w * kbd^(1-w); kbd can
    // underflow to 0 at extreme conflict, where the interpolant vanishes too
    double value;
    if (w >= 1.0)
        value = design.kappa;
    else if (kbd <= 0.0)
        value = 0.0;
    else
        value = std::exp(w * std::log(design.kappa) + (1.0 - w) * std::log(kbd));
    return std::max(std::min(value, cfg.alpha_up), cfg.alpha_low);
}

double gamma_cd(const NormalDesign& design, const NormalPrior& prior, double ybar_C,
                double kappa_cd) {
    return gamma_fd(design, prior, ybar_C, kappa_cd);
}

}  // namespace hct
