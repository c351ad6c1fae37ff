#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hct/borrow_alt.hpp"
#include "hct/normal_hybrid.hpp"
#include "hct/numerics.hpp"

namespace hct {

/// Priors for both arms; a flat treatment prior marks the hybrid-control case.
struct GeneralTwoArmPrior {
    NormalPrior control;
    NormalPrior treatment = NormalPrior::flat();

    bool hybrid_control() const { return treatment.is_flat(); }
};

enum class Estimator { closed_form, quadrature, monte_carlo, enumeration };

std::string_view estimator_name(Estimator e);

struct OCPoint {
    double theta_C = 0.0;
    double delta = 0.0;
    double value = 0.0;
    Estimator estimator = Estimator::quadrature;
    double mc_se = 0.0;
    std::uint64_t reps = 0;
    RngStream seed;
};

struct RiskPoint {
    double theta_C = 0.0;
    double theta_T = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double risk = 0.0;
};

/// A borrowing method expressed as a data-dependent frequentist threshold
/// kappa(ybar_C), with its Bayes-side dual gamma(ybar_C). Gamma/kappa/band
/// overrides support recalibration.
class DecisionRule {
public:
    enum class Kind { fd, bd, cdc, cdd, power_prior, eb_power, rm_unit };

    static DecisionRule fd();
    static DecisionRule bd();
    static DecisionRule cdc(const CompromiseConfig& cfg);
    static DecisionRule cdd(const CompromiseConfig& cfg);
    static DecisionRule power_prior(double zeta);
    static DecisionRule eb_power();
    static DecisionRule rm_unit(double weight);

    Kind kind() const { return kind_; }
    std::string_view name() const;

    DecisionRule with_gamma(double gamma) const;
    DecisionRule with_kappa(double kappa) const;
    DecisionRule with_alpha_up(double alpha_up) const;
    DecisionRule with_bounds(double alpha_low, double alpha_up) const;
    const CompromiseConfig& config() const { return cfg_; }

    /// Frequentist threshold at the observed control mean.
    double kappa_at(const NormalDesign& design, const NormalPrior& prior,
                    double ybar_C) const;
    /// Bayes threshold giving identical decisions.
    double gamma_at(const NormalDesign& design, const NormalPrior& prior,
                    double ybar_C) const;

    double effective_gamma(const NormalDesign& design) const;
    double effective_kappa(const NormalDesign& design) const;

private:
    explicit DecisionRule(Kind kind) : kind_(kind) {}

    NormalDesign adjusted(const NormalDesign& design) const;

    Kind kind_;
    CompromiseConfig cfg_{};
    double zeta_ = 1.0;
    double mixture_weight_ = 0.7;
    std::optional<double> gamma_override_;
    std::optional<double> kappa_override_;
};

/// Closed-form rejection probability of the Bayes test, priors on both arms
/// allowed; flat treatment prior recovers the hybrid-control expression.
double power_bd_closed(const NormalDesign& design, const GeneralTwoArmPrior& priors,
                       double theta_C, double theta_T);

/// Rejection probability of a threshold rule by integrating the conditional
/// rejection probability over the control-mean sampling distribution.
double power_rule_quadrature(const NormalDesign& design, const NormalPrior& prior,
                             const DecisionRule& rule, double theta_C, double theta_T,
                             double tol = 1e-8);

/// Monte Carlo rejection fraction with per-stream reproducibility.
OCPoint power_rule_mc(const NormalDesign& design, const NormalPrior& prior,
                      const DecisionRule& rule, double theta_C, double theta_T,
                      std::uint64_t reps, const RngStream& stream,
                      bool parallel = true);

/// Quadrature OC at each grid point; grid points are independent, so the
/// parallel and serial paths produce identical vectors.
std::vector<double> oc_curve_quadrature(const NormalDesign& design,
                                        const NormalPrior& prior,
                                        const DecisionRule& rule,
                                        const std::vector<double>& theta_Cs,
                                        double delta, double tol = 1e-8,
                                        bool parallel = true);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

enum class TuningKnob { gamma, kappa, alpha_up };

TuningKnob default_knob(DecisionRule::Kind kind);

struct RecalibrationResult {
    bool attained = false;
    double knob_value = 0.0;
    double achieved_max_tie = 0.0;
    /// max TIE at the bracket floor; the smallest cap the knob can deliver
    /// without degenerating into a test that (practically) never rejects.
    double infimum_max_tie = 0.0;
    std::string note;
};

/// Tunes one knob so the maximum TIE over the conflict range hits `target`.
/// Max TIE must be monotone in the knob over the bracket.
RecalibrationResult recalibrate_max_tie(const NormalDesign& design,
                                        const NormalPrior& prior,
                                        const DecisionRule& rule, TuningKnob knob,
                                        double target, Interval conflict_range,
                                        int grid_points = 81,
                                        Interval knob_bracket = {1e-3, 0.5});

DecisionRule apply_knob(const DecisionRule& rule, TuningKnob knob, double value);

struct TieRange {
    double min_tie = 0.0;
    double max_tie = 0.0;
};

TieRange tie_range(const NormalDesign& design, const NormalPrior& prior,
                   const DecisionRule& rule, Interval conflict_range,
                   int grid_points = 81);

/// Rejection probability at (theta_C, theta_C + delta) averaged over a
/// sampling prior for the control mean.
double average_oc(const NormalDesign& design, const NormalPrior& prior_analysis,
                  const DecisionRule& rule, const NormalPrior& sampling_prior,
                  double delta, double tol = 1e-8);

/// Weighted 0-1 loss averaged over the data distribution.
RiskPoint frequentist_risk(const NormalDesign& design, const NormalPrior& prior,
                           const DecisionRule& rule, double theta_C, double theta_T,
                           double c0, double c1);

/// Posterior expected loss of a reject/accept decision.
double posterior_expected_loss(const NormalDesign& design, const NormalPrior& prior,
                               const TwoArmNormalData& data, bool reject, double c0,
                               double c1);

enum class PowerGapSign { positive, zero, negative };

struct PowerGap {
    PowerGapSign sign = PowerGapSign::zero;
    double gap = 0.0;  // Phi^-1(1 - calibrated power) - Phi^-1(1 - borrowing power)
};

/// Sign of the power difference between the TIE-matched no-borrowing test and
/// the full-borrowing test, decided by n_T sigma_T^2 vs n_C sigma_C^2.
PowerGap calibrated_power_gap_sign(const NormalDesign& design,
                                   const GeneralTwoArmPrior& priors, double theta_C,
                                   double theta_T);

/// Max discrepancy between the per-arm-update and regression-form posteriors
/// of the treatment effect (mean and sd).
double regression_equivalence_check(const NormalDesign& design,
                                    const GeneralTwoArmPrior& priors,
                                    const TwoArmNormalData& data);

struct PosteriorNullMap {
    std::vector<double> conflict;      // ybar_C - mu_C
    std::vector<double> effect;        // ybar_T - ybar_C
    std::vector<double> prob_null;     // row-major over (conflict, effect)
    std::vector<std::string> rule_names;
    /// per rule, the smallest effect rejected at each conflict value
    std::vector<std::vector<double>> boundaries;
};

PosteriorNullMap posterior_null_map(const NormalDesign& design,
                                    const NormalPrior& prior,
                                    const std::vector<double>& conflict_grid,
                                    const std::vector<double>& effect_grid,
                                    const std::vector<DecisionRule>& rules);

}  // namespace hct
