#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hct {

struct Tolerance {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_iter = 500;

    void validate() const;
};

/// Convergence failure that still carries the best estimate reached.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

class BracketingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Counter-based random stream: draw i of stream (seed, stream_id) is a pure
// function of (seed, stream_id, i). Streams and positions can therefore be
// evaluated in any order, on any thread, with identical results.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    RngStream substream(std::uint64_t k) const;
    double uniform(std::uint64_t i) const;  // strictly inside (0, 1)
    double normal(std::uint64_t i) const;   // standard normal
};

double std_normal_pdf(double x);
double std_normal_cdf(double x);
double std_normal_quantile(double p);
double log_gamma(double x);
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Adaptive Gauss-Kronrod integration of f over [lo, hi].
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const Tolerance& tol = Tolerance{});

/// Bisection with a final secant polish. Requires a sign change on [lo, hi].
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const Tolerance& tol = Tolerance{});

std::vector<double> draw_normal(const RngStream& stream, double mean, double sd,
                                std::size_t n);

}  // namespace hct
