#include "hct/oc_engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hct {

std::string_view estimator_name(Estimator e) {
    switch (e) {
        case Estimator::closed_form: return "closed_form";
        case Estimator::quadrature: return "quadrature";
        case Estimator::monte_carlo: return "monte_carlo";
        case Estimator::enumeration: return "enumeration";
    }
    return "unknown";
}

DecisionRule DecisionRule::fd() { return DecisionRule(Kind::fd); }
DecisionRule DecisionRule::bd() { return DecisionRule(Kind::bd); }

DecisionRule DecisionRule::cdc(const CompromiseConfig& cfg) {
    DecisionRule r(Kind::cdc);
    r.cfg_ = cfg;
    return r;
}

DecisionRule DecisionRule::cdd(const CompromiseConfig& cfg) {
    DecisionRule r(Kind::cdd);
    r.cfg_ = cfg;
    return r;
}

DecisionRule DecisionRule::power_prior(double zeta) {
    DecisionRule r(Kind::power_prior);
    r.zeta_ = zeta;
    return r;
}

DecisionRule DecisionRule::eb_power() { return DecisionRule(Kind::eb_power); }

DecisionRule DecisionRule::rm_unit(double weight) {
    DecisionRule r(Kind::rm_unit);
    r.mixture_weight_ = weight;
    return r;
}

std::string_view DecisionRule::name() const {
    switch (kind_) {
        case Kind::fd: return "FD";
        case Kind::bd: return "BD";
        case Kind::cdc: return "CDC";
        case Kind::cdd: return "CDD";
        case Kind::power_prior: return "PP";
        case Kind::eb_power: return "EBPowD";
        case Kind::rm_unit: return "RMD-Unit";
    }
    return "unknown";
}

DecisionRule DecisionRule::with_gamma(double gamma) const {
    DecisionRule r = *this;
    r.gamma_override_ = gamma;
    return r;
}

DecisionRule DecisionRule::with_kappa(double kappa) const {
    DecisionRule r = *this;
    r.kappa_override_ = kappa;
    return r;
}

DecisionRule DecisionRule::with_alpha_up(double alpha_up) const {
    DecisionRule r = *this;
    r.cfg_.alpha_up = alpha_up;
    return r;
}

DecisionRule DecisionRule::with_bounds(double alpha_low, double alpha_up) const {
    DecisionRule r = *this;
    r.cfg_.alpha_low = alpha_low;
    r.cfg_.alpha_up = alpha_up;
    return r;
}

double DecisionRule::effective_gamma(const NormalDesign& design) const {
    return gamma_override_ ? *gamma_override_ : design.gamma;
}

double DecisionRule::effective_kappa(const NormalDesign& design) const {
    return kappa_override_ ? *kappa_override_ : design.kappa;
}

NormalDesign DecisionRule::adjusted(const NormalDesign& design) const {
    NormalDesign d = design;
    d.gamma = effective_gamma(design);
    d.kappa = effective_kappa(design);
    return d;
}

double DecisionRule::kappa_at(const NormalDesign& design, const NormalPrior& prior,
                              double ybar_C) const {
    const NormalDesign d = adjusted(design);
    switch (kind_) {
        case Kind::fd:
            return d.kappa;
        case Kind::bd:
            return kappa_bd(d, prior, ybar_C);
        case Kind::cdc:
            return cdc_threshold(kappa_bd(d, prior, ybar_C), cfg_);
        case Kind::cdd:
            return cdd_threshold(d, prior, ybar_C, cfg_);
        case Kind::power_prior: {
            PowerPriorSpec spec;
            spec.base = prior;
            spec.zeta = zeta_;
            return pp_threshold(d, spec, ybar_C);
        }
        case Kind::eb_power:
            return ebpow_threshold(d, prior, ybar_C);
        case Kind::rm_unit:
            return rm_threshold(
                d, MixturePrior::unit_information(prior, d, mixture_weight_), ybar_C);
    }
    throw std::logic_error("DecisionRule::kappa_at: unknown kind");
}

double DecisionRule::gamma_at(const NormalDesign& design, const NormalPrior& prior,
                              double ybar_C) const {
    return gamma_cd(design, prior, ybar_C, kappa_at(design, prior, ybar_C));
}

namespace {

double treatment_variance_ratio(const NormalDesign& design, const NormalPrior& prior) {
    if (prior.is_flat()) return 0.0;
    return design.sigma * design.sigma / (design.n_T * prior.sigma_C * prior.sigma_C);
}

}  // namespace

double power_bd_closed(const NormalDesign& design, const GeneralTwoArmPrior& priors,
                       double theta_C, double theta_T) {
    const double a_C = priors.control.variance_ratio(design);
    const double a_T = treatment_variance_ratio(design, priors.treatment);

    const double sd_post = std::sqrt(design.var_T() / (1.0 + a_T) +
                                     design.var_C() / (1.0 + a_C));
    const double denom =
        std::sqrt(design.var_T() / ((1.0 + a_T) * (1.0 + a_T)) +
                  design.var_C() / ((1.0 + a_C) * (1.0 + a_C)));
    const double num = design.delta0 + theta_C / (1.0 + a_C) -
                       theta_T / (1.0 + a_T) -
                       priors.treatment.mu_C * a_T / (1.0 + a_T) +
                       priors.control.mu_C * a_C / (1.0 + a_C) +
                       std_normal_quantile(1.0 - design.gamma) * sd_post;
    return 1.0 - std_normal_cdf(num / denom);
}

namespace {

// rejection probability given the observed control mean
double conditional_reject_prob(const NormalDesign& design, double kappa,
                               double ybar_C, double theta_T) {
    if (kappa <= 0.0) return 0.0;
    if (kappa >= 1.0) return 1.0;
    const double cut = ybar_C + design.delta0 +
                       std_normal_quantile(1.0 - kappa) * design.sd_freq();
    return 1.0 - std_normal_cdf((cut - theta_T) * std::sqrt(design.n_T) /
                                design.sigma);
}

}  // namespace

double power_rule_quadrature(const NormalDesign& design, const NormalPrior& prior,
                             const DecisionRule& rule, double theta_C, double theta_T,
                             double tol) {
    const double sd_C = design.sigma / std::sqrt(design.n_C);
    const auto integrand = [&](double ybar_C) {
        const double kappa = rule.kappa_at(design, prior, ybar_C);
        const double dens = std_normal_pdf((ybar_C - theta_C) / sd_C) / sd_C;
        return conditional_reject_prob(design, kappa, ybar_C, theta_T) * dens;
    };
    Tolerance t;
    t.abs_tol = tol;
    t.rel_tol = 0.0;
    t.max_iter = 2000;
    return integrate(integrand, theta_C - 8.0 * sd_C, theta_C + 8.0 * sd_C, t);
}

OCPoint power_rule_mc(const NormalDesign& design, const NormalPrior& prior,
                      const DecisionRule& rule, double theta_C, double theta_T,
                      std::uint64_t reps, const RngStream& stream, bool parallel) {
    if (reps < 1) throw std::invalid_argument("power_rule_mc: reps must be >= 1");
    const double sd_C = design.sigma / std::sqrt(design.n_C);
    const double sd_T = design.sigma / std::sqrt(design.n_T);

    const std::int64_t n = static_cast<std::int64_t>(reps);
    std::int64_t rejections = 0;
#pragma omp parallel for schedule(static) reduction(+ : rejections) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        const double ybar_C = theta_C + sd_C * stream.normal(2 * i);
        const double ybar_T = theta_T + sd_T * stream.normal(2 * i + 1);
        const double kappa = rule.kappa_at(design, prior, ybar_C);
        if (freq_decision(design, {ybar_C, ybar_T}, kappa)) ++rejections;
    }
    OCPoint pt;
    pt.theta_C = theta_C;
    pt.delta = theta_T - theta_C;
    pt.value = static_cast<double>(rejections) / static_cast<double>(reps);
    pt.estimator = Estimator::monte_carlo;
    pt.mc_se = std::sqrt(pt.value * (1.0 - pt.value) / static_cast<double>(reps));
    pt.reps = reps;
    pt.seed = stream;
    return pt;
}

std::vector<double> oc_curve_quadrature(const NormalDesign& design,
                                        const NormalPrior& prior,
                                        const DecisionRule& rule,
                                        const std::vector<double>& theta_Cs,
                                        double delta, double tol, bool parallel) {
    std::vector<double> out(theta_Cs.size());
    const std::int64_t n = static_cast<std::int64_t>(theta_Cs.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t i = 0; i < n; ++i)
        out[i] = power_rule_quadrature(design, prior, rule, theta_Cs[i],
                                       theta_Cs[i] + delta, tol);
    return out;
}

TuningKnob default_knob(DecisionRule::Kind kind) {
    switch (kind) {
        case DecisionRule::Kind::fd: return TuningKnob::kappa;
        case DecisionRule::Kind::cdc:
        case DecisionRule::Kind::cdd: return TuningKnob::alpha_up;
        default: return TuningKnob::gamma;
    }
}

DecisionRule apply_knob(const DecisionRule& rule, TuningKnob knob, double value) {
    switch (knob) {
        case TuningKnob::gamma: return rule.with_gamma(value);
        case TuningKnob::kappa: return rule.with_kappa(value);
        case TuningKnob::alpha_up: return rule.with_alpha_up(value);
    }
    throw std::logic_error("apply_knob: unknown knob");
}

namespace {

std::vector<double> conflict_grid(const NormalPrior& prior, Interval range,
                                  int points) {
    if (points < 2) throw std::invalid_argument("recalibrate: need >= 2 grid points");
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = prior.mu_C + range.lo +
                  (range.hi - range.lo) * i / static_cast<double>(points - 1);
    return grid;
}

}  // namespace

TieRange tie_range(const NormalDesign& design, const NormalPrior& prior,
                   const DecisionRule& rule, Interval conflict_range,
                   int grid_points) {
    const std::vector<double> grid =
        conflict_grid(prior, conflict_range, grid_points);
    const std::vector<double> ties =
        oc_curve_quadrature(design, prior, rule, grid, design.delta0);
    TieRange r{ties.front(), ties.front()};
    for (const double v : ties) {
        r.min_tie = std::min(r.min_tie, v);
        r.max_tie = std::max(r.max_tie, v);
    }
    return r;
}

RecalibrationResult recalibrate_max_tie(const NormalDesign& design,
                                        const NormalPrior& prior,
                                        const DecisionRule& rule, TuningKnob knob,
                                        double target, Interval conflict_range,
                                        int grid_points, Interval knob_bracket) {
    const std::vector<double> grid =
        conflict_grid(prior, conflict_range, grid_points);
    const auto max_tie_at = [&](double value) {
        const DecisionRule tuned = apply_knob(rule, knob, value);
        const std::vector<double> ties =
            oc_curve_quadrature(design, prior, tuned, grid, design.delta0);
        double m = ties.front();
        for (const double v : ties) m = std::max(m, v);
        return m;
    };

    double lo = knob_bracket.lo;
    double hi = knob_bracket.hi;
    if (knob == TuningKnob::alpha_up)
        lo = std::max(lo, rule.config().alpha_low * (1.0 + 1e-9));

    RecalibrationResult res;
    const double at_lo = max_tie_at(lo);
    res.infimum_max_tie = at_lo;
    if (at_lo > target) {
        res.attained = false;
        res.achieved_max_tie = at_lo;
        res.note = "target below the smallest cap reachable on the knob bracket; "
                   "only a rule that (practically) never rejects can go lower";
        return res;
    }
    const double at_hi = max_tie_at(hi);
    if (at_hi < target) {
        res.attained = false;
        res.achieved_max_tie = at_hi;
        res.note = "target above the largest max TIE reachable on the knob bracket";
        return res;
    }

    Tolerance tol;
    tol.abs_tol = 1e-8;
    tol.max_iter = 200;
    const double knob_value =
        find_root([&](double v) { return max_tie_at(v) - target; }, lo, hi, tol);
    res.attained = true;
    res.knob_value = knob_value;
    res.achieved_max_tie = max_tie_at(knob_value);
    return res;
}

double average_oc(const NormalDesign& design, const NormalPrior& prior_analysis,
                  const DecisionRule& rule, const NormalPrior& sampling_prior,
                  double delta, double tol) {
    if (sampling_prior.is_flat())
        throw std::invalid_argument("average_oc: sampling prior must be proper");
    const double s = sampling_prior.sigma_C;
    const double mu = sampling_prior.mu_C;
    const auto integrand = [&](double theta_C) {
        const double dens = std_normal_pdf((theta_C - mu) / s) / s;
        return power_rule_quadrature(design, prior_analysis, rule, theta_C,
                                     theta_C + delta, tol * 0.1) *
               dens;
    };
    Tolerance t;
    t.abs_tol = tol;
    t.rel_tol = 0.0;
    t.max_iter = 2000;
    return integrate(integrand, mu - 8.0 * s, mu + 8.0 * s, t);
}

RiskPoint frequentist_risk(const NormalDesign& design, const NormalPrior& prior,
                           const DecisionRule& rule, double theta_C, double theta_T,
                           double c0, double c1) {
    if (c0 < 0.0 || c1 < 0.0)
        throw std::invalid_argument("frequentist_risk: costs must be >= 0");
    const double beta = power_rule_quadrature(design, prior, rule, theta_C, theta_T);
    RiskPoint r;
    r.theta_C = theta_C;
    r.theta_T = theta_T;
    r.c0 = c0;
    r.c1 = c1;
    r.risk = theta_T - theta_C <= design.delta0 ? c1 * beta : c0 * (1.0 - beta);
    return r;
}

double posterior_expected_loss(const NormalDesign& design, const NormalPrior& prior,
                               const TwoArmNormalData& data, bool reject, double c0,
                               double c1) {
    if (c0 < 0.0 || c1 < 0.0)
        throw std::invalid_argument("posterior_expected_loss: costs must be >= 0");
    const double p_null = bd_decision(design, prior, data).prob_null;
    return reject ? c1 * p_null : c0 * (1.0 - p_null);
}

PowerGap calibrated_power_gap_sign(const NormalDesign& design,
                                   const GeneralTwoArmPrior& priors, double theta_C,
                                   double theta_T) {
    if (priors.treatment.is_flat())
        throw std::domain_error(
            "calibrated_power_gap_sign: needs a proper treatment prior");
    if (priors.control.is_flat())
        throw std::domain_error(
            "calibrated_power_gap_sign: needs a proper control prior");
    if (design.delta0 != 0.0)
        throw std::domain_error("calibrated_power_gap_sign: requires delta0 = 0");
    if (!(theta_T > theta_C))
        throw std::domain_error("calibrated_power_gap_sign: requires theta_T > theta_C");

    const double a_C = priors.control.variance_ratio(design);
    const double a_T = treatment_variance_ratio(design, priors.treatment);

    const double s = design.sd_freq();
    const double stretched =
        std::sqrt(design.var_T() + design.var_C() * (1.0 + a_T) * (1.0 + a_T) /
                                       ((1.0 + a_C) * (1.0 + a_C)));
    PowerGap g;
    g.gap = (theta_T - theta_C) * (1.0 / stretched - 1.0 / s);

    const double lhs = design.n_T * priors.treatment.sigma_C * priors.treatment.sigma_C;
    const double rhs = design.n_C * priors.control.sigma_C * priors.control.sigma_C;
    const double tol = 1e-12 * std::max(lhs, rhs);
    if (std::fabs(lhs - rhs) <= tol)
        g.sign = PowerGapSign::zero;
    else if (lhs > rhs)
        g.sign = PowerGapSign::positive;  // gap > 0: calibrated power below borrowing
    else
        g.sign = PowerGapSign::negative;  // gap < 0: calibrated power above borrowing
    return g;
}

double regression_equivalence_check(const NormalDesign& design,
                                    const GeneralTwoArmPrior& priors,
                                    const TwoArmNormalData& data) {
    const double sigma2 = design.sigma * design.sigma;
    const double n0C =
        priors.control.is_flat()
            ? 0.0
            : sigma2 / (priors.control.sigma_C * priors.control.sigma_C);
    const double n0T =
        priors.treatment.is_flat()
            ? 0.0
            : sigma2 / (priors.treatment.sigma_C * priors.treatment.sigma_C);

    // route 1: independent conjugate updates per arm, then difference
    const double mean_C = (priors.control.mu_C * n0C + data.ybar_C * design.n_C) /
                          (n0C + design.n_C);
    const double mean_T = (priors.treatment.mu_C * n0T + data.ybar_T * design.n_T) /
                          (n0T + design.n_T);
    const double var1 = sigma2 / (n0T + design.n_T) + sigma2 / (n0C + design.n_C);
    const double mean1 = mean_T - mean_C;

    // route 2: joint update of (control mean, effect) in regression form
    const double l11 = design.n_C + design.n_T + n0C + n0T;
    const double l12 = design.n_T + n0T;
    const double l22 = design.n_T + n0T;
    const double r1 = design.n_C * data.ybar_C + design.n_T * data.ybar_T +
                      n0C * priors.control.mu_C + n0T * priors.treatment.mu_C;
    const double r2 = design.n_T * data.ybar_T + n0T * priors.treatment.mu_C;
    const double det = l11 * l22 - l12 * l12;
    const double mean2 = (l11 * r2 - l12 * r1) / det;
    const double var2 = sigma2 * l11 / det;

    return std::max(std::fabs(mean1 - mean2),
                    std::fabs(std::sqrt(var1) - std::sqrt(var2)));
}

PosteriorNullMap posterior_null_map(const NormalDesign& design,
                                    const NormalPrior& prior,
                                    const std::vector<double>& conflict_grid,
                                    const std::vector<double>& effect_grid,
                                    const std::vector<DecisionRule>& rules) {
    PosteriorNullMap map;
    map.conflict = conflict_grid;
    map.effect = effect_grid;
    map.prob_null.resize(conflict_grid.size() * effect_grid.size());
    for (std::size_t i = 0; i < conflict_grid.size(); ++i) {
        const double ybar_C = prior.mu_C + conflict_grid[i];
        for (std::size_t j = 0; j < effect_grid.size(); ++j) {
            const double ybar_T = ybar_C + effect_grid[j];
            map.prob_null[i * effect_grid.size() + j] =
                bd_decision(design, prior, {ybar_C, ybar_T}).prob_null;
        }
    }
    for (const DecisionRule& rule : rules) {
        map.rule_names.emplace_back(rule.name());
        std::vector<double> boundary(conflict_grid.size());
        for (std::size_t i = 0; i < conflict_grid.size(); ++i) {
            const double ybar_C = prior.mu_C + conflict_grid[i];
            const double kappa = rule.kappa_at(design, prior, ybar_C);
            if (kappa <= 0.0)
                boundary[i] = std::numeric_limits<double>::infinity();
            else if (kappa >= 1.0)
                boundary[i] = -std::numeric_limits<double>::infinity();
            else
                boundary[i] = design.delta0 +
                              std_normal_quantile(1.0 - kappa) * design.sd_freq();
        }
        map.boundaries.push_back(std::move(boundary));
    }
    return map;
}

}  // namespace hct
