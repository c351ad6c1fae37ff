#pragma once

#include <array>

#include "hct/normal_hybrid.hpp"

namespace hct {

/// Power prior: informative prior with its likelihood discounted by zeta.
struct PowerPriorSpec {
    NormalPrior base;
    double zeta = 1.0;

    void validate() const;
};

/// Two-component control-arm prior; the robust component is typically the
/// unit-information prior N(mu_C, sigma).
struct MixturePrior {
    double weight = 0.7;  // weight on the informative component
    NormalPrior informative;
    NormalPrior robust;

    static MixturePrior unit_information(const NormalPrior& informative,
                                         const NormalDesign& design,
                                         double weight = 0.7);
    void validate() const;
};

struct GaussianComponent {
    double mean = 0.0;
    double sd = 1.0;
};

/// Posterior of the control mean under a mixture prior: component-wise
/// conjugate updates with conflict-adapted weights.
struct MixturePosterior {
    std::array<double, 2> weights{1.0, 0.0};
    std::array<GaussianComponent, 2> components{};
};

/// Frequentist threshold reproducing the power-prior Bayes decision.
double pp_threshold(const NormalDesign& design, const PowerPriorSpec& spec,
                    double ybar_C);
double pp_threshold(const NormalDesign& design, const PowerPriorSpec& spec,
                    double ybar_C, double gamma);

/// Marginal-likelihood estimate of the power parameter, clamped to [0, 1].
double eb_zeta(const NormalDesign& design, const NormalPrior& prior, double ybar_C);

/// Power-prior threshold evaluated at the estimated power parameter.
double ebpow_threshold(const NormalDesign& design, const NormalPrior& prior,
                       double ybar_C);
double ebpow_threshold(const NormalDesign& design, const NormalPrior& prior,
                       double ybar_C, double gamma);

MixturePosterior rm_posterior(const NormalDesign& design, const MixturePrior& prior,
                              double ybar_C);

/// P(delta <= delta0 | y) under the mixture prior.
double rm_prob_null(const NormalDesign& design, const MixturePrior& prior,
                    const TwoArmNormalData& data);

/// Smallest z statistic rejected under the mixture prior at the observed
/// control mean; found by root search over ybar_T.
double rm_critical_value(const NormalDesign& design, const MixturePrior& prior,
                         double ybar_C);
double rm_critical_value(const NormalDesign& design, const MixturePrior& prior,
                         double ybar_C, double gamma);

/// Frequentist threshold 1 - Phi(rm_critical_value).
double rm_threshold(const NormalDesign& design, const MixturePrior& prior,
                    double ybar_C);
double rm_threshold(const NormalDesign& design, const MixturePrior& prior,
                    double ybar_C, double gamma);

}  // namespace hct
