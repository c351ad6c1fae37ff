#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hct/binomial_hybrid.hpp"
#include "hct/oc_engine.hpp"

namespace hct {

enum class Outcome { normal, binomial };

struct RuleSpec {
    std::string rule;  // FD, BD, CDC, CDD, PP, EBPowD, RMD-Unit, RM-Beta
    CompromiseConfig cfg{};
    double zeta = 1.0;           // PP
    double weight = 0.7;         // RMD-Unit / RM-Beta
    BetaPrior robust{1.0, 1.0};  // RM-Beta robust component
    bool nested_scale = false;   // binomial CDD scale variant
};

struct GridSpec {
    double conflict_lo = -2.0;
    double conflict_hi = 2.0;
    int points = 81;
    std::vector<double> deltas{0.0};
};

struct AverageSpec {
    bool enabled = false;
    // sampling prior; empty means "analysis prior"
    std::optional<double> mu_C;
    std::optional<double> n0_C;
    std::optional<double> sigma_C;
};

struct RecalibrateSpec {
    bool enabled = false;
    double target_max_tie = 0.075;
    Interval knob_bracket{1e-3, 0.5};
};

struct MapSpec {
    bool enabled = false;
    Interval conflict{-2.0, 2.0};
    int conflict_points = 81;
    Interval effect{-1.0, 2.0};
    int effect_points = 61;
};

struct ScenarioConfig {
    std::string scenario_id;
    Outcome outcome = Outcome::normal;

    NormalDesign normal_design{};
    NormalPrior normal_prior{};

    BinomialDesign binomial_design{};

    std::vector<RuleSpec> rules;
    GridSpec grid{};
    Estimator engine = Estimator::quadrature;
    AverageSpec average{};
    RecalibrateSpec recalibrate{};
    MapSpec map{};
    std::uint64_t reps = 200000;
    std::uint64_t seed = 20240101;

    /// Hash over the semantic content; stable against formatting changes.
    std::uint64_t config_hash() const;
};

/// Parses and validates a config file. Unknown keys and malformed values are
/// reported with their JSON path.
ScenarioConfig load_config(const std::filesystem::path& file);
ScenarioConfig parse_config(const std::string& json_text);

struct ResultRow {
    std::string scenario_id;
    std::string rule;
    double theta_C;
    double delta;
    std::string metric;  // tie, power, avg_tie, avg_power, threshold, critical_z
    double value;
    double mc_se;
    std::string estimator;
    std::uint64_t reps;
};

struct ResultTable {
    std::vector<ResultRow> rows;

    void sort_rows();
    std::string to_csv() const;
};

/// Runs a scenario and writes results.csv and manifest.json into out_dir.
ResultTable run_scenario(const ScenarioConfig& config,
                         const std::filesystem::path& out_dir);

/// Writes per-rule threshold curves (conflict, critical z, both thresholds);
/// normal outcomes only.
void emit_thresholds(const ScenarioConfig& config,
                     const std::filesystem::path& out_dir);

/// Built-in binomial case study evaluated by complete enumeration.
ResultTable emit_case_study(const std::filesystem::path& out_dir,
                            double conflict_step = 0.01);

ScenarioConfig case_study_config();

std::string manifest_json(const ScenarioConfig& config);

}  // namespace hct
