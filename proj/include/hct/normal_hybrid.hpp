#pragma once

#include <limits>

namespace hct {

/// Two-arm trial geometry with known common outcome standard deviation.
/// gamma is the posterior-probability threshold of the Bayes test, kappa the
/// level of the plain z-test.
struct NormalDesign {
    int n_C = 1;
    int n_T = 1;
    double sigma = 1.0;
    double delta0 = 0.0;
    double gamma = 0.025;
    double kappa = 0.025;

    double var_C() const { return sigma * sigma / n_C; }
    double var_T() const { return sigma * sigma / n_T; }
    double sd_freq() const;  // z-test denominator sqrt(var_C + var_T)
    void validate() const;
};

/// Informative prior for the control arm mean. A flat prior (no borrowing) is
/// represented by an infinite sigma_C.
struct NormalPrior {
    double mu_C = 0.0;
    double sigma_C = std::numeric_limits<double>::infinity();

    static NormalPrior flat(double mu = 0.0);
    static NormalPrior from_effective_size(double mu, double sigma, double n0_C);

    bool is_flat() const { return !(sigma_C < std::numeric_limits<double>::infinity()); }
    /// Data-to-prior variance ratio sigma^2 / (n_C sigma_C^2); zero when flat.
    double variance_ratio(const NormalDesign& design) const;
    void validate() const;
};

struct TwoArmNormalData {
    double ybar_C = 0.0;
    double ybar_T = 0.0;
    void validate() const;
};

/// Tuning for the compromise thresholds: TIE band [alpha_low, alpha_up] plus
/// the discard scale t and speed p of the conflict weight.
struct CompromiseConfig {
    double alpha_low = 0.01;
    double alpha_up = 0.075;
    double t = 4.0;
    double p = 4.0;
    bool freeze_w_below_mean = false;

    void validate() const;
};

struct DeltaPosterior {
    double mean = 0.0;
    double sd = 1.0;
};

struct BayesDecision {
    double prob_null = 0.5;
    bool reject = false;
};

DeltaPosterior posterior_delta(const NormalDesign& design, const NormalPrior& prior,
                               const TwoArmNormalData& data);

/// Bayes test: reject when P(delta <= delta0 | y) <= gamma.
BayesDecision bd_decision(const NormalDesign& design, const NormalPrior& prior,
                          const TwoArmNormalData& data);

/// z-test at threshold kappa; kappa outside (0,1) degenerates to never/always.
bool freq_decision(const NormalDesign& design, const TwoArmNormalData& data,
                   double kappa);

/// Frequentist threshold reproducing the Bayes decision at the observed
/// control mean. Strictly increasing in ybar_C whenever borrowing is active.
double kappa_bd(const NormalDesign& design, const NormalPrior& prior, double ybar_C);
double kappa_bd(const NormalDesign& design, const NormalPrior& prior, double ybar_C,
                double gamma);

/// Bayes threshold reproducing the z-test decision at level kappa.
double gamma_fd(const NormalDesign& design, const NormalPrior& prior, double ybar_C,
                double kappa);

/// Band-constrained compromise threshold: clamp of kappa_bd to the TIE band.
double cdc_threshold(double kappa_bd_value, const CompromiseConfig& cfg);

struct ConflictBounds {
    double ybar_low;
    double ybar_up;
};

/// Control means at which kappa_bd exits the TIE band (closed form).
ConflictBounds conflict_bounds(const NormalDesign& design, const NormalPrior& prior,
                               const CompromiseConfig& cfg);

/// Control mean where the borrow-adjusted and plain thresholds coincide.
double equal_threshold_point(const NormalDesign& design, const NormalPrior& prior);

/// Discard weight in [0, 1] driven by |ybar_C - mu_C|.
double cdd_weight(const NormalDesign& design, const NormalPrior& prior, double ybar_C,
                  const CompromiseConfig& cfg);

/// Discarding compromise threshold: geometric interpolation between kappa and
/// kappa_bd, then clamp to the TIE band.
double cdd_threshold(const NormalDesign& design, const NormalPrior& prior,
                     double ybar_C, const CompromiseConfig& cfg);
double cdd_threshold(const NormalDesign& design, const NormalPrior& prior,
                     double ybar_C, const CompromiseConfig& cfg, double gamma);

/// Bayes threshold that reproduces the frequentist decision at a
/// data-dependent level kappa_cd.
double gamma_cd(const NormalDesign& design, const NormalPrior& prior, double ybar_C,
                double kappa_cd);

}  // namespace hct
