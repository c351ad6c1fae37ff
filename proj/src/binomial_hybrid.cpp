#include "hct/binomial_hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace hct {

void BinomialDesign::validate() const {
    if (n_C < 1 || n_T < 1)
        throw std::invalid_argument("BinomialDesign: sample sizes must be >= 1");
    if (prior_C.a < 0.0 || prior_C.b < 0.0 || prior_T.a < 0.0 || prior_T.b < 0.0)
        throw std::invalid_argument("BinomialDesign: prior parameters must be >= 0");
    if (external.n0_C < 0 || external.y0_C < 0 || external.y0_C > external.n0_C)
        throw std::invalid_argument("BinomialDesign: need 0 <= y0_C <= n0_C");
    if (!(gamma > 0.0 && gamma < 1.0) || !(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("BinomialDesign: thresholds must be in (0, 1)");
    if (!informative_prior_C().proper())
        throw std::invalid_argument(
            "BinomialDesign: informative control prior must be proper");
}

void BetaMixturePrior::validate() const {
    if (!(weight >= 0.0 && weight <= 1.0))
        throw std::invalid_argument("BetaMixturePrior: weight must be in [0, 1]");
    if (!informative.proper() || !robust.proper())
        throw std::invalid_argument("BetaMixturePrior: components must be proper");
}

namespace {

void require_valid_data(const BinomialDesign& d, const BinomialData& y) {
    if (y.y_C < 0 || y.y_C > d.n_C || y.y_T < 0 || y.y_T > d.n_T)
        throw std::invalid_argument("BinomialData: counts out of range");
}

double log_beta_pdf(double x, double a, double b) {
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
}

}  // namespace

double prob_null_exact(const BetaPrior& post_C, const BetaPrior& post_T,
                       const Tolerance& tol) {
    if (!post_C.proper() || !post_T.proper())
        throw std::domain_error("prob_null_exact: posteriors must be proper");

    const auto integrand = [&](double x) {
        return std::exp(log_beta_pdf(x, post_C.a, post_C.b)) *
               incomplete_beta(post_T.a, post_T.b, x);
    };

    // segment around both posterior cores so the first pass sees the peaks
    auto core = [](const BetaPrior& p) {
        const double m = p.mean();
        const double v = p.a * p.b / ((p.a + p.b) * (p.a + p.b) * (p.a + p.b + 1.0));
        return std::pair<double, double>(m, std::sqrt(v));
    };
    const auto [m_C, s_C] = core(post_C);
    const auto [m_T, s_T] = core(post_T);
    std::vector<double> cuts = {0.0, 1.0, m_C, m_T};
    for (const double off : {-8.0, -3.0, 3.0, 8.0}) {
        cuts.push_back(m_C + off * s_C);
        cuts.push_back(m_T + off * s_T);
    }
    for (double& c : cuts) c = std::clamp(c, 0.0, 1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return b - a < 1e-12; }),
               cuts.end());
    if (cuts.back() < 1.0) cuts.push_back(1.0);

    Tolerance seg_tol = tol;
    seg_tol.abs_tol = tol.abs_tol / static_cast<double>(cuts.size());

    double total = 0.0, comp = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double term = integrate(integrand, cuts[i], cuts[i + 1], seg_tol);
        const double y = term - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    return std::clamp(total, 0.0, 1.0);
}

double g_term(double a, double b, double c, double d) {
    if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0))
        throw std::domain_error("g_term: arguments must be > 0");
    return std::exp(log_gamma(a + b) + log_gamma(c + d) + log_gamma(a + c) +
                    log_gamma(b + d) - log_gamma(a) - log_gamma(b) - log_gamma(c) -
                    log_gamma(d) - log_gamma(a + b + c + d));
}

double l_term(double c, double d, double a, double b) {
    if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0))
        throw std::domain_error("l_term: arguments must be > 0");
    if (!(b + d - 1.0 > 0.0) || !(a + b + c + d - 1.0 > 0.0))
        throw std::domain_error("l_term: shifted arguments must be > 0");
    return std::exp(log_gamma(a + b) + log_gamma(c + d) + log_gamma(a + c) +
                    log_gamma(b + d - 1.0) - log_gamma(a) - log_gamma(b) -
                    log_gamma(c + 1.0) - log_gamma(d) -
                    log_gamma(a + b + c + d - 1.0));
}

double prob_null_recursion(const BinomialDesign& design, const BinomialData& data) {
    require_valid_data(design, data);
    const int y0 = design.external.y0_C;
    const int n0 = design.external.n0_C;

    const BetaPrior base_C = design.prior_C.updated(data.y_C, design.n_C);
    const BetaPrior post_T = design.prior_T.updated(data.y_T, design.n_T);
    double total = prob_null_exact(base_C, post_T);

    // one success added per step, then one failure per step; terms span many
    // orders of magnitude, so accumulate with compensation
    double comp = 0.0;
    auto add = [&](double term) {
        const double y = term - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    };
    for (int i = 0; i < y0; ++i)
        add(g_term(base_C.a + i, base_C.b, post_T.a, post_T.b) / (base_C.a + i));
    for (int i = 0; i < n0 - y0; ++i)
        add(-g_term(base_C.a + y0, base_C.b + i, post_T.a, post_T.b) /
            (base_C.b + i));
    return total;
}

double prob_null_unconditional_approx(const BinomialData& data, int n_C, int n_T) {
    const int pooled = data.y_C + data.y_T;
    if (pooled <= 0 || pooled >= n_C + n_T)
        throw std::domain_error(
            "prob_null_unconditional_approx: pooled successes must be interior");
    const double num = static_cast<double>(data.y_C) * (n_T - data.y_T) -
                       static_cast<double>(data.y_T) * (n_C - data.y_C);
    const double scale = std::sqrt(
        static_cast<double>(n_C + n_T) /
        (static_cast<double>(n_C) * n_T * pooled * (n_C + n_T - pooled)));
    return std_normal_cdf(num * scale);
}

double prob_null_pi0(const BinomialDesign& design, const BinomialData& data,
                     const Tolerance& tol) {
    require_valid_data(design, data);
    return prob_null_exact(kJeffreys.updated(data.y_C, design.n_C),
                           kJeffreys.updated(data.y_T, design.n_T), tol);
}

double prob_null_pi(const BinomialDesign& design, const BinomialData& data,
                    const Tolerance& tol) {
    require_valid_data(design, data);
    return prob_null_exact(design.informative_prior_C().updated(data.y_C, design.n_C),
                           design.prior_T.updated(data.y_T, design.n_T), tol);
}

double kappa_bd_binomial(const BinomialDesign& design, const BinomialData& data) {
    const double shift = prob_null_pi(design, data) - prob_null_pi0(design, data);
    return design.kappa - shift;
}

namespace {

double cd_threshold_from(const BinomialDesign& design, const BinomialData& data,
                         double kappa_bd_value, const CompromiseConfig& cfg,
                         BinomialRule rule, bool nested_scale) {
    cfg.validate();
    if (rule == BinomialRule::cdc)
        return std::max(std::min(kappa_bd_value, cfg.alpha_up), cfg.alpha_low);

    const int n0 = design.external.n0_C;
    double w = 1.0;
    if (n0 > 0) {
        const double rho = static_cast<double>(data.y_C + design.external.y0_C) /
                           (design.n_C + n0);
        if (rho > 0.0 && rho < 1.0) {
            const double inv_sizes = 1.0 / design.n_C + 1.0 / n0;
            const double scale =
                nested_scale
                    ? cfg.t * std::sqrt(rho * (1.0 - rho) * std::sqrt(inv_sizes))
                    : cfg.t * std::sqrt(rho * (1.0 - rho) * inv_sizes);
            const double conflict =
                std::fabs(static_cast<double>(data.y_C) / design.n_C -
                          design.prior_mean_C());
            const double ratio = conflict / scale;
            w = ratio >= 1.0 ? 1.0 : std::pow(ratio, cfg.p);
        }
        // degenerate pooled data (rho in {0,1}) keeps w = 1: full discard
    }
    double value;
    if (w >= 1.0)
        value = design.kappa;
    else if (kappa_bd_value <= 0.0)
        value = 0.0;
    else
        value = std::exp(w * std::log(design.kappa) +
                         (1.0 - w) * std::log(kappa_bd_value));
    return std::max(std::min(value, cfg.alpha_up), cfg.alpha_low);
}

}  // namespace

double binomial_cd_threshold(const BinomialDesign& design, const BinomialData& data,
                             const CompromiseConfig& cfg, BinomialRule rule,
                             bool nested_scale) {
    if (rule != BinomialRule::cdc && rule != BinomialRule::cdd)
        throw std::invalid_argument("binomial_cd_threshold: rule must be cdc or cdd");
    return cd_threshold_from(design, data, kappa_bd_binomial(design, data), cfg, rule,
                             nested_scale);
}

bool binomial_decision(const BinomialDesign& design, const BinomialData& data,
                       BinomialRule rule, const CompromiseConfig& cfg,
                       bool nested_scale) {
    const double p0 = prob_null_pi0(design, data);
    switch (rule) {
        case BinomialRule::fd:
            return p0 <= design.kappa;
        case BinomialRule::bd:
            return p0 <= kappa_bd_binomial(design, data);
        case BinomialRule::cdc:
        case BinomialRule::cdd:
            return p0 <= binomial_cd_threshold(design, data, cfg, rule, nested_scale);
    }
    throw std::logic_error("binomial_decision: unknown rule");
}

double prob_null_beta_mixture(const BinomialDesign& design,
                              const BetaMixturePrior& mix, const BinomialData& data,
                              const Tolerance& tol) {
    mix.validate();
    require_valid_data(design, data);
    const BetaPrior comps[2] = {mix.informative, mix.robust};
    const double prior_w[2] = {mix.weight, 1.0 - mix.weight};

    // posterior component weights: prior weight times beta-binomial marginal
    double logw[2];
    for (int i = 0; i < 2; ++i) {
        if (prior_w[i] <= 0.0) {
            logw[i] = -std::numeric_limits<double>::infinity();
            continue;
        }
        logw[i] = std::log(prior_w[i]) +
                  log_beta(comps[i].a + data.y_C, comps[i].b + design.n_C - data.y_C) -
                  log_beta(comps[i].a, comps[i].b);
    }
    const double m = std::max(logw[0], logw[1]);
    const double e0 = std::exp(logw[0] - m);
    const double e1 = std::exp(logw[1] - m);

    const BetaPrior post_T = design.prior_T.updated(data.y_T, design.n_T);
    double p = 0.0;
    const double ws[2] = {e0 / (e0 + e1), e1 / (e0 + e1)};
    for (int i = 0; i < 2; ++i) {
        if (ws[i] == 0.0) continue;
        p += ws[i] *
             prob_null_exact(comps[i].updated(data.y_C, design.n_C), post_T, tol);
    }
    return p;
}

std::vector<double> prob_null_table(const BinomialDesign& design,
                                    const BetaPrior& control_prior,
                                    const Tolerance& tol, bool parallel) {
    design.validate();
    const int rows = design.n_C + 1;
    const int cols = design.n_T + 1;
    std::vector<double> table(static_cast<std::size_t>(rows) * cols);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int y_C = 0; y_C < rows; ++y_C) {
        const BetaPrior post_C = control_prior.updated(y_C, design.n_C);
        for (int y_T = 0; y_T < cols; ++y_T) {
            const BetaPrior post_T = design.prior_T.updated(y_T, design.n_T);
            table[static_cast<std::size_t>(y_C) * cols + y_T] =
                prob_null_exact(post_C, post_T, tol);
        }
    }
    return table;
}

PosteriorTables posterior_tables(const BinomialDesign& design, const Tolerance& tol,
                                 bool parallel) {
    PosteriorTables t;
    t.p_null_pi0 = prob_null_table(design, kJeffreys, tol, parallel);
    t.p_null_pi = prob_null_table(design, design.informative_prior_C(), tol, parallel);
    return t;
}

DecisionTable decision_table(const BinomialDesign& design,
                             const PosteriorTables& tables, BinomialRule rule,
                             const CompromiseConfig& cfg, bool nested_scale) {
    const int rows = design.n_C + 1;
    const int cols = design.n_T + 1;
    DecisionTable out;
    out.n_C = design.n_C;
    out.n_T = design.n_T;
    out.reject.assign(static_cast<std::size_t>(rows) * cols, 0);
    for (int y_C = 0; y_C < rows; ++y_C) {
        for (int y_T = 0; y_T < cols; ++y_T) {
            const std::size_t idx = static_cast<std::size_t>(y_C) * cols + y_T;
            const double p0 = tables.p_null_pi0[idx];
            double threshold;
            switch (rule) {
                case BinomialRule::fd:
                    threshold = design.kappa;
                    break;
                case BinomialRule::bd:
                    threshold = design.kappa - (tables.p_null_pi[idx] - p0);
                    break;
                default: {
                    const double kbd =
                        design.kappa - (tables.p_null_pi[idx] - p0);
                    threshold = cd_threshold_from(design, BinomialData{y_C, y_T}, kbd,
                                                  cfg, rule, nested_scale);
                    break;
                }
            }
            out.reject[idx] = p0 <= threshold ? 1 : 0;
        }
    }
    return out;
}

DecisionTable mixture_decision_table(const BinomialDesign& design,
                                     const PosteriorTables& tables,
                                     const std::vector<double>& p_null_robust,
                                     const BetaMixturePrior& mix) {
    mix.validate();
    const int rows = design.n_C + 1;
    const int cols = design.n_T + 1;
    DecisionTable out;
    out.n_C = design.n_C;
    out.n_T = design.n_T;
    out.reject.assign(static_cast<std::size_t>(rows) * cols, 0);
    for (int y_C = 0; y_C < rows; ++y_C) {
        double logw[2] = {
            std::log(mix.weight) +
                log_beta(mix.informative.a + y_C,
                         mix.informative.b + design.n_C - y_C) -
                log_beta(mix.informative.a, mix.informative.b),
            std::log(1.0 - mix.weight) +
                log_beta(mix.robust.a + y_C, mix.robust.b + design.n_C - y_C) -
                log_beta(mix.robust.a, mix.robust.b)};
        if (mix.weight <= 0.0) logw[0] = -std::numeric_limits<double>::infinity();
        if (mix.weight >= 1.0) logw[1] = -std::numeric_limits<double>::infinity();
        const double m = std::max(logw[0], logw[1]);
        const double e0 = std::exp(logw[0] - m);
        const double e1 = std::exp(logw[1] - m);
        const double w_inf = e0 / (e0 + e1);
        for (int y_T = 0; y_T < cols; ++y_T) {
            const std::size_t idx = static_cast<std::size_t>(y_C) * cols + y_T;
            const double p_mix =
                w_inf * tables.p_null_pi[idx] + (1.0 - w_inf) * p_null_robust[idx];
            out.reject[idx] = p_mix <= design.gamma ? 1 : 0;
        }
    }
    return out;
}

std::vector<double> binomial_pmf(int n, double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("binomial_pmf: p must be in [0, 1]");
    std::vector<double> pmf(n + 1, 0.0);
    if (p == 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p == 1.0) {
        pmf[n] = 1.0;
        return pmf;
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lchoose0 = log_gamma(n + 1.0);
    for (int y = 0; y <= n; ++y) {
        const double logpmf = lchoose0 - log_gamma(y + 1.0) - log_gamma(n - y + 1.0) +
                              y * lp + (n - y) * lq;
        pmf[y] = std::exp(logpmf);
    }
    return pmf;
}

double enumerate_oc(const DecisionTable& table, double theta_C, double delta,
                    bool parallel) {
    const double theta_T = theta_C + delta;
    if (!(theta_C >= 0.0 && theta_C <= 1.0 && theta_T >= 0.0 && theta_T <= 1.0))
        throw std::domain_error("enumerate_oc: arm probabilities must be in [0, 1]");
    const std::vector<double> pmf_C = binomial_pmf(table.n_C, theta_C);
    const std::vector<double> pmf_T = binomial_pmf(table.n_T, theta_T);
    const int cols = table.n_T + 1;

    // per-row partials, then an ordered reduction: identical results whether
    // or not the row loop runs in parallel
    std::vector<double> row(table.n_C + 1, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
    for (int y_C = 0; y_C <= table.n_C; ++y_C) {
        double acc = 0.0;
        const std::uint8_t* r = table.reject.data() +
                                static_cast<std::size_t>(y_C) * cols;
        for (int y_T = 0; y_T < cols; ++y_T)
            if (r[y_T]) acc += pmf_T[y_T];
        row[y_C] = acc * pmf_C[y_C];
    }
    double total = 0.0, comp = 0.0;
    for (int y_C = 0; y_C <= table.n_C; ++y_C) {
        const double y = row[y_C] - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    return total;
}

}  // namespace hct
