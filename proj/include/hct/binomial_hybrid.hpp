#pragma once

#include <cstdint>
#include <vector>

#include "hct/normal_hybrid.hpp"
#include "hct/numerics.hpp"

namespace hct {

struct BetaPrior {
    double a = 0.5;
    double b = 0.5;

    double mean() const { return a / (a + b); }
    bool proper() const { return a > 0.0 && b > 0.0; }
    /// Posterior after y successes out of n.
    BetaPrior updated(int y, int n) const { return {a + y, b + n - y}; }
};

/// Independent Jeffreys priors: the reference prior of the no-borrowing test.
inline constexpr BetaPrior kJeffreys{0.5, 0.5};

struct ExternalControlData {
    int y0_C = 0;
    int n0_C = 0;
};

struct BinomialDesign {
    int n_C = 1;
    int n_T = 1;
    BetaPrior prior_C = kJeffreys;  // base of the informative control prior
    BetaPrior prior_T = kJeffreys;
    ExternalControlData external;
    double gamma = 0.025;
    double kappa = 0.025;

    /// Control prior with the external data folded in.
    BetaPrior informative_prior_C() const {
        return {prior_C.a + external.y0_C,
                prior_C.b + external.n0_C - external.y0_C};
    }
    /// Reference proportion against which conflict is measured.
    double prior_mean_C() const {
        if (external.n0_C > 0)
            return static_cast<double>(external.y0_C) / external.n0_C;
        return informative_prior_C().mean();
    }
    void validate() const;
};

struct BinomialData {
    int y_C = 0;
    int y_T = 0;
};

/// P(theta_T <= theta_C) for independent Beta posteriors, by adaptive
/// quadrature of the treatment CDF against the control density.
double prob_null_exact(const BetaPrior& post_C, const BetaPrior& post_T,
                       const Tolerance& tol = Tolerance{1e-12, 0.0, 4000});

double g_term(double a, double b, double c, double d);
double l_term(double c, double d, double a, double b);

/// Posterior probability of the null under the informative prior, built from
/// the base-prior value plus one g-term per external success/failure.
double prob_null_recursion(const BinomialDesign& design, const BinomialData& data);

/// Normal approximation to the Jeffreys-prior posterior probability (the
/// unconditional two-proportion test statistic).
double prob_null_unconditional_approx(const BinomialData& data, int n_C, int n_T);

/// Exact posterior probabilities of the null under the reference (Jeffreys)
/// and informative priors.
double prob_null_pi0(const BinomialDesign& design, const BinomialData& data,
                     const Tolerance& tol = Tolerance{1e-12, 0.0, 4000});
double prob_null_pi(const BinomialDesign& design, const BinomialData& data,
                    const Tolerance& tol = Tolerance{1e-12, 0.0, 4000});

/// Frequentist threshold reproducing the borrowing decision at this outcome;
/// kappa - (P_pi - P_pi0). May leave [0, 1]; decisions handle that as
/// never/always reject.
double kappa_bd_binomial(const BinomialDesign& design, const BinomialData& data);

enum class BinomialRule { fd, bd, cdc, cdd };

/// Compromise thresholds for binomial outcomes. The discard weight uses the
/// pooled two-proportion z denominator by default; `nested_scale` switches to
/// the variant with the square root applied to (1/n_C + 1/n0_C) only.
double binomial_cd_threshold(const BinomialDesign& design, const BinomialData& data,
                             const CompromiseConfig& cfg, BinomialRule rule,
                             bool nested_scale = false);

bool binomial_decision(const BinomialDesign& design, const BinomialData& data,
                       BinomialRule rule,
                       const CompromiseConfig& cfg = CompromiseConfig{},
                       bool nested_scale = false);

/// Two-component Beta mixture prior for the control arm.
struct BetaMixturePrior {
    double weight = 0.7;  // weight on the informative component
    BetaPrior informative;
    BetaPrior robust{1.0, 1.0};

    void validate() const;
};

/// Posterior probability of the null under a Beta mixture control prior.
double prob_null_beta_mixture(const BinomialDesign& design,
                              const BetaMixturePrior& mix, const BinomialData& data,
                              const Tolerance& tol = Tolerance{1e-12, 0.0, 4000});

/// Full (n_C+1) x (n_T+1) table of P(theta_T <= theta_C | y) for a given
/// control prior (treatment prior from the design). Row-major by y_C.
std::vector<double> prob_null_table(const BinomialDesign& design,
                                    const BetaPrior& control_prior,
                                    const Tolerance& tol = Tolerance{1e-11, 0.0, 4000},
                                    bool parallel = true);

/// Reject/accept over every outcome pair; a pure function of the design.
struct DecisionTable {
    int n_C = 0;
    int n_T = 0;
    std::vector<std::uint8_t> reject;

    bool at(int y_C, int y_T) const {
        return reject[static_cast<std::size_t>(y_C) * (n_T + 1) + y_T] != 0;
    }
};

/// Precomputed posterior tables shared by all threshold rules.
struct PosteriorTables {
    std::vector<double> p_null_pi0;  // Jeffreys
    std::vector<double> p_null_pi;   // informative
};

PosteriorTables posterior_tables(const BinomialDesign& design,
                                 const Tolerance& tol = Tolerance{1e-11, 0.0, 4000},
                                 bool parallel = true);

DecisionTable decision_table(const BinomialDesign& design,
                             const PosteriorTables& tables, BinomialRule rule,
                             const CompromiseConfig& cfg = CompromiseConfig{},
                             bool nested_scale = false);

/// Decision table for the mixture-prior test (needs the robust component's
/// posterior table in addition to the shared ones).
DecisionTable mixture_decision_table(const BinomialDesign& design,
                                     const PosteriorTables& tables,
                                     const std::vector<double>& p_null_robust,
                                     const BetaMixturePrior& mix);

std::vector<double> binomial_pmf(int n, double p);

/// Exact rejection probability at (theta_C, theta_C + delta) by summing the
/// outcome distribution against the decision table.
double enumerate_oc(const DecisionTable& table, double theta_C, double delta,
                    bool parallel = true);

}  // namespace hct
