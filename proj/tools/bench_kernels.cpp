// Times the OpenMP kernels against their serial reference implementations and
// checks that both produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hct/binomial_hybrid.hpp"
#include "hct/oc_engine.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

void report(const std::string& name, double serial_s, double parallel_s, bool match) {
    std::printf("%-28s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n",
                name.c_str(), serial_s, parallel_s,
                parallel_s > 0 ? serial_s / parallel_s : 0.0,
                match ? "results match" : "RESULTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    int n_binomial = 120;
    std::uint64_t reps = 200000;
    if (argc > 1) n_binomial = std::atoi(argv[1]);
    if (argc > 2) reps = std::strtoull(argv[2], nullptr, 10);

    // binomial posterior table
    hct::BinomialDesign bdesign;
    bdesign.n_C = n_binomial;
    bdesign.n_T = n_binomial;
    bdesign.external = {static_cast<int>(std::lround(0.65 * n_binomial / 2)),
                        n_binomial / 2};
    {
        auto t0 = Clock::now();
        auto serial = hct::prob_null_table(bdesign, hct::kJeffreys,
                                           hct::Tolerance{1e-11, 0.0, 4000}, false);
        auto t1 = Clock::now();
        auto parallel = hct::prob_null_table(bdesign, hct::kJeffreys,
                                             hct::Tolerance{1e-11, 0.0, 4000}, true);
        auto t2 = Clock::now();
        report("posterior table " + std::to_string(n_binomial) + "x" +
                   std::to_string(n_binomial),
               seconds(t0, t1), seconds(t1, t2), serial == parallel);
    }

    // exact OC enumeration over the outcome grid
    {
        const hct::PosteriorTables tables = hct::posterior_tables(bdesign);
        const hct::DecisionTable table =
            hct::decision_table(bdesign, tables, hct::BinomialRule::cdc);
        const std::vector<double> thetas = [] {
            std::vector<double> t;
            for (double v = 0.30; v <= 1.0; v += 0.01) t.push_back(v);
            return t;
        }();
        auto t0 = Clock::now();
        std::vector<double> serial, parallel;
        for (double th : thetas) serial.push_back(hct::enumerate_oc(table, th, 0.0, false));
        auto t1 = Clock::now();
        for (double th : thetas) parallel.push_back(hct::enumerate_oc(table, th, 0.0, true));
        auto t2 = Clock::now();
        report("enumeration sweep", seconds(t0, t1), seconds(t1, t2), serial == parallel);
    }

    // Monte Carlo power
    {
        hct::NormalDesign design;
        design.n_C = design.n_T = 20;
        const hct::NormalPrior prior =
            hct::NormalPrior::from_effective_size(0.0, 1.0, 10.0);
        const hct::DecisionRule rule = hct::DecisionRule::bd();
        const hct::RngStream stream{20240101, 7};
        auto t0 = Clock::now();
        const hct::OCPoint serial =
            hct::power_rule_mc(design, prior, rule, 0.0, 1.0, reps, stream, false);
        auto t1 = Clock::now();
        const hct::OCPoint parallel =
            hct::power_rule_mc(design, prior, rule, 0.0, 1.0, reps, stream, true);
        auto t2 = Clock::now();
        report("monte carlo power (" + std::to_string(reps) + ")", seconds(t0, t1),
               seconds(t1, t2), serial.value == parallel.value);
    }

    // quadrature TIE curve
    {
        hct::NormalDesign design;
        design.n_C = design.n_T = 20;
        const hct::NormalPrior prior =
            hct::NormalPrior::from_effective_size(0.0, 1.0, 10.0);
        hct::CompromiseConfig cfg;
        const hct::DecisionRule rule = hct::DecisionRule::cdd(cfg);
        std::vector<double> grid(81);
        for (int i = 0; i < 81; ++i) grid[i] = -2.0 + 4.0 * i / 80.0;
        auto t0 = Clock::now();
        auto serial = hct::oc_curve_quadrature(design, prior, rule, grid, 0.0, 1e-8, false);
        auto t1 = Clock::now();
        auto parallel = hct::oc_curve_quadrature(design, prior, rule, grid, 0.0, 1e-8, true);
        auto t2 = Clock::now();
        report("quadrature TIE curve (81)", seconds(t0, t1), seconds(t1, t2),
               serial == parallel);
    }
    return 0;
}
