#include "hct/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hct {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

[[noreturn]] void config_fail(const std::string& path, const std::string& msg) {
    throw std::runtime_error("config error at " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) config_fail(path + "." + key, "unknown key");
    }
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) config_fail(path + "." + key, "missing");
    if (!obj[key].is_number()) config_fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& path, const std::string& key,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) config_fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) config_fail(path + "." + key, "missing");
    if (!obj[key].is_number_integer()) config_fail(path + "." + key, "expected an integer");
    return obj[key].get<int>();
}

double require_probability(double v, const std::string& path) {
    if (!(v > 0.0 && v < 1.0)) config_fail(path, "must be in (0, 1)");
    return v;
}

Estimator parse_engine(const std::string& s, const std::string& path) {
    if (s == "closed_form") return Estimator::closed_form;
    if (s == "quadrature") return Estimator::quadrature;
    if (s == "monte_carlo") return Estimator::monte_carlo;
    if (s == "enumeration") return Estimator::enumeration;
    config_fail(path, "unknown engine '" + s + "'");
}

Interval parse_interval(const json& obj, const std::string& path) {
    check_keys(obj, path, {"lo", "hi", "points"});
    Interval iv{get_number(obj, path, "lo"), get_number(obj, path, "hi")};
    if (!(iv.lo <= iv.hi)) config_fail(path, "needs lo <= hi");
    return iv;
}

RuleSpec parse_rule(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"rule", "alpha_low", "alpha_up", "t", "p", "freeze_w_below_mean",
                "zeta", "weight", "robust_a", "robust_b", "nested_scale"});
    if (!obj.contains("rule") || !obj["rule"].is_string())
        config_fail(path + ".rule", "missing rule name");
    RuleSpec spec;
    spec.rule = obj["rule"].get<std::string>();
    static const std::set<std::string> known = {"FD",     "BD",     "CDC",
                                                "CDD",    "PP",     "EBPowD",
                                                "RMD-Unit", "RM-Beta"};
    if (!known.count(spec.rule)) config_fail(path + ".rule", "unknown rule '" + spec.rule + "'");
    spec.cfg.alpha_low = get_number_or(obj, path, "alpha_low", spec.cfg.alpha_low);
    spec.cfg.alpha_up = get_number_or(obj, path, "alpha_up", spec.cfg.alpha_up);
    spec.cfg.t = get_number_or(obj, path, "t", spec.cfg.t);
    spec.cfg.p = get_number_or(obj, path, "p", spec.cfg.p);
    if (obj.contains("freeze_w_below_mean"))
        spec.cfg.freeze_w_below_mean = obj["freeze_w_below_mean"].get<bool>();
    spec.zeta = get_number_or(obj, path, "zeta", spec.zeta);
    spec.weight = get_number_or(obj, path, "weight", spec.weight);
    spec.robust.a = get_number_or(obj, path, "robust_a", spec.robust.a);
    spec.robust.b = get_number_or(obj, path, "robust_b", spec.robust.b);
    if (obj.contains("nested_scale")) spec.nested_scale = obj["nested_scale"].get<bool>();
    if (spec.rule == "CDC" || spec.rule == "CDD") spec.cfg.validate();
    if (spec.rule == "PP" && !(spec.zeta >= 0.0 && spec.zeta <= 1.0))
        config_fail(path + ".zeta", "must be in [0, 1]");
    if ((spec.rule == "RMD-Unit" || spec.rule == "RM-Beta") &&
        !(spec.weight >= 0.0 && spec.weight <= 1.0))
        config_fail(path + ".weight", "must be in [0, 1]");
    return spec;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config error: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw std::runtime_error("config error: root must be an object");
    check_keys(root, "$",
               {"scenario_id", "outcome", "design", "prior", "rules", "grids",
                "engine", "average", "recalibrate", "map", "reps", "seed"});

    ScenarioConfig cfg;
    if (!root.contains("scenario_id") || !root["scenario_id"].is_string())
        config_fail("$.scenario_id", "missing or not a string");
    cfg.scenario_id = root["scenario_id"].get<std::string>();

    const std::string outcome = root.value("outcome", std::string("normal"));
    if (outcome == "normal")
        cfg.outcome = Outcome::normal;
    else if (outcome == "binomial")
        cfg.outcome = Outcome::binomial;
    else
        config_fail("$.outcome", "must be 'normal' or 'binomial'");

    if (!root.contains("design") || !root["design"].is_object())
        config_fail("$.design", "missing");
    const json& design = root["design"];
    if (!root.contains("prior") || !root["prior"].is_object())
        config_fail("$.prior", "missing");
    const json& prior = root["prior"];

    if (cfg.outcome == Outcome::normal) {
        check_keys(design, "$.design", {"n_C", "n_T", "sigma", "delta0", "gamma", "kappa"});
        cfg.normal_design.n_C = get_int(design, "$.design", "n_C");
        cfg.normal_design.n_T = get_int(design, "$.design", "n_T");
        cfg.normal_design.sigma = get_number(design, "$.design", "sigma");
        cfg.normal_design.delta0 = get_number_or(design, "$.design", "delta0", 0.0);
        cfg.normal_design.gamma = require_probability(
            get_number_or(design, "$.design", "gamma", 0.025), "$.design.gamma");
        cfg.normal_design.kappa = require_probability(
            get_number_or(design, "$.design", "kappa", 0.025), "$.design.kappa");
        try {
            cfg.normal_design.validate();
        } catch (const std::exception& e) {
            config_fail("$.design", e.what());
        }

        check_keys(prior, "$.prior", {"mu_C", "n0_C", "sigma_C", "flat"});
        const double mu_C = get_number(prior, "$.prior", "mu_C");
        const bool flat = prior.value("flat", false);
        const int ways = (prior.contains("n0_C") ? 1 : 0) +
                         (prior.contains("sigma_C") ? 1 : 0) + (flat ? 1 : 0);
        if (ways != 1)
            config_fail("$.prior", "specify exactly one of n0_C, sigma_C, flat");
        if (flat) {
            cfg.normal_prior = NormalPrior::flat(mu_C);
        } else if (prior.contains("n0_C")) {
            cfg.normal_prior = NormalPrior::from_effective_size(
                mu_C, cfg.normal_design.sigma, get_number(prior, "$.prior", "n0_C"));
        } else {
            cfg.normal_prior.mu_C = mu_C;
            cfg.normal_prior.sigma_C = get_number(prior, "$.prior", "sigma_C");
        }
        try {
            cfg.normal_prior.validate();
        } catch (const std::exception& e) {
            config_fail("$.prior", e.what());
        }
    } else {
        check_keys(design, "$.design", {"n_C", "n_T", "gamma", "kappa"});
        cfg.binomial_design.n_C = get_int(design, "$.design", "n_C");
        cfg.binomial_design.n_T = get_int(design, "$.design", "n_T");
        cfg.binomial_design.gamma = require_probability(
            get_number_or(design, "$.design", "gamma", 0.025), "$.design.gamma");
        cfg.binomial_design.kappa = require_probability(
            get_number_or(design, "$.design", "kappa", 0.025), "$.design.kappa");

        check_keys(prior, "$.prior",
                   {"a_C", "b_C", "a_T", "b_T", "y0_C", "n0_C", "improper_base"});
        cfg.binomial_design.prior_C.a = get_number_or(prior, "$.prior", "a_C", 0.5);
        cfg.binomial_design.prior_C.b = get_number_or(prior, "$.prior", "b_C", 0.5);
        cfg.binomial_design.prior_T.a = get_number_or(prior, "$.prior", "a_T", 0.5);
        cfg.binomial_design.prior_T.b = get_number_or(prior, "$.prior", "b_T", 0.5);
        cfg.binomial_design.external.y0_C = get_int(prior, "$.prior", "y0_C");
        cfg.binomial_design.external.n0_C = get_int(prior, "$.prior", "n0_C");
        if (cfg.binomial_design.prior_C.a == 0.0 && cfg.binomial_design.prior_C.b == 0.0 &&
            !prior.value("improper_base", false))
            config_fail("$.prior", "a_C = b_C = 0 requires improper_base: true");
        try {
            cfg.binomial_design.validate();
        } catch (const std::exception& e) {
            config_fail("$.design/prior", e.what());
        }
    }

    if (!root.contains("rules") || !root["rules"].is_array() || root["rules"].empty())
        config_fail("$.rules", "must be a non-empty array");
    for (std::size_t i = 0; i < root["rules"].size(); ++i)
        cfg.rules.push_back(
            parse_rule(root["rules"][i], "$.rules[" + std::to_string(i) + "]"));

    for (const RuleSpec& r : cfg.rules) {
        if (cfg.outcome == Outcome::normal && r.rule == "RM-Beta")
            config_fail("$.rules", "RM-Beta applies to binomial outcomes only");
        if (cfg.outcome == Outcome::binomial &&
            (r.rule == "RMD-Unit" || r.rule == "PP" || r.rule == "EBPowD"))
            config_fail("$.rules", r.rule + " applies to normal outcomes only");
    }

    if (root.contains("grids")) {
        const json& grids = root["grids"];
        check_keys(grids, "$.grids", {"conflict", "deltas"});
        if (grids.contains("conflict")) {
            const json& c = grids["conflict"];
            const Interval iv = parse_interval(c, "$.grids.conflict");
            cfg.grid.conflict_lo = iv.lo;
            cfg.grid.conflict_hi = iv.hi;
            cfg.grid.points = c.contains("points") ? get_int(c, "$.grids.conflict", "points") : 81;
            if (cfg.grid.points < 1) config_fail("$.grids.conflict.points", "must be >= 1");
        }
        if (grids.contains("deltas")) {
            if (!grids["deltas"].is_array() || grids["deltas"].empty())
                config_fail("$.grids.deltas", "must be a non-empty array");
            cfg.grid.deltas.clear();
            for (const auto& d : grids["deltas"]) {
                if (!d.is_number()) config_fail("$.grids.deltas", "entries must be numbers");
                cfg.grid.deltas.push_back(d.get<double>());
            }
        }
    }

    if (root.contains("engine"))
        cfg.engine = parse_engine(root["engine"].get<std::string>(), "$.engine");
    else
        cfg.engine = cfg.outcome == Outcome::binomial ? Estimator::enumeration
                                                      : Estimator::quadrature;

    if (cfg.outcome == Outcome::binomial && cfg.engine != Estimator::enumeration)
        config_fail("$.engine", "binomial scenarios support the enumeration engine only");
    if (cfg.engine == Estimator::closed_form)
        for (const RuleSpec& r : cfg.rules)
            if (r.rule != "BD" && r.rule != "FD")
                config_fail("$.engine",
                            "closed_form supports BD and FD only; use quadrature");

    if (root.contains("average")) {
        const json& avg = root["average"];
        check_keys(avg, "$.average", {"sampling"});
        cfg.average.enabled = true;
        if (avg.contains("sampling") && avg["sampling"].is_object()) {
            const json& s = avg["sampling"];
            check_keys(s, "$.average.sampling", {"mu_C", "n0_C", "sigma_C"});
            cfg.average.mu_C = get_number(s, "$.average.sampling", "mu_C");
            if (s.contains("n0_C"))
                cfg.average.n0_C = get_number(s, "$.average.sampling", "n0_C");
            else
                cfg.average.sigma_C = get_number(s, "$.average.sampling", "sigma_C");
        } else if (avg.contains("sampling") &&
                   avg["sampling"].get<std::string>() != "analysis") {
            config_fail("$.average.sampling", "must be 'analysis' or an object");
        }
        if (cfg.outcome == Outcome::binomial)
            config_fail("$.average", "average OCs are for normal outcomes");
    }

    if (root.contains("recalibrate")) {
        const json& rec = root["recalibrate"];
        check_keys(rec, "$.recalibrate", {"target_max_tie", "knob_lo", "knob_hi"});
        cfg.recalibrate.enabled = true;
        cfg.recalibrate.target_max_tie = require_probability(
            get_number(rec, "$.recalibrate", "target_max_tie"), "$.recalibrate.target_max_tie");
        cfg.recalibrate.knob_bracket.lo =
            get_number_or(rec, "$.recalibrate", "knob_lo", cfg.recalibrate.knob_bracket.lo);
        cfg.recalibrate.knob_bracket.hi =
            get_number_or(rec, "$.recalibrate", "knob_hi", cfg.recalibrate.knob_bracket.hi);
        if (cfg.outcome == Outcome::binomial)
            config_fail("$.recalibrate", "recalibration is for normal outcomes");
    }

    if (root.contains("map")) {
        const json& m = root["map"];
        check_keys(m, "$.map", {"conflict", "effect"});
        cfg.map.enabled = true;
        if (m.contains("conflict")) {
            cfg.map.conflict = parse_interval(m["conflict"], "$.map.conflict");
            cfg.map.conflict_points = m["conflict"].contains("points")
                                          ? get_int(m["conflict"], "$.map.conflict", "points")
                                          : cfg.map.conflict_points;
        }
        if (m.contains("effect")) {
            cfg.map.effect = parse_interval(m["effect"], "$.map.effect");
            cfg.map.effect_points = m["effect"].contains("points")
                                        ? get_int(m["effect"], "$.map.effect", "points")
                                        : cfg.map.effect_points;
        }
    }

    if (root.contains("reps")) {
        if (!root["reps"].is_number_unsigned()) config_fail("$.reps", "must be a nonnegative integer");
        cfg.reps = root["reps"].get<std::uint64_t>();
        if (cfg.reps < 1) config_fail("$.reps", "must be >= 1");
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) config_fail("$.seed", "must be a nonnegative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config file: " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

json semantic_json(const ScenarioConfig& c) {
    json j;
    j["scenario_id"] = c.scenario_id;
    j["outcome"] = c.outcome == Outcome::normal ? "normal" : "binomial";
    if (c.outcome == Outcome::normal) {
        j["design"] = {{"n_C", c.normal_design.n_C},   {"n_T", c.normal_design.n_T},
                       {"sigma", c.normal_design.sigma}, {"delta0", c.normal_design.delta0},
                       {"gamma", c.normal_design.gamma}, {"kappa", c.normal_design.kappa}};
        j["prior"] = {{"mu_C", c.normal_prior.mu_C},
                      {"sigma_C", c.normal_prior.is_flat() ? -1.0 : c.normal_prior.sigma_C}};
    } else {
        j["design"] = {{"n_C", c.binomial_design.n_C},
                       {"n_T", c.binomial_design.n_T},
                       {"gamma", c.binomial_design.gamma},
                       {"kappa", c.binomial_design.kappa}};
        j["prior"] = {{"a_C", c.binomial_design.prior_C.a},
                      {"b_C", c.binomial_design.prior_C.b},
                      {"a_T", c.binomial_design.prior_T.a},
                      {"b_T", c.binomial_design.prior_T.b},
                      {"y0_C", c.binomial_design.external.y0_C},
                      {"n0_C", c.binomial_design.external.n0_C}};
    }
    j["rules"] = json::array();
    for (const RuleSpec& r : c.rules) {
        json jr = {{"rule", r.rule}};
        if (r.rule == "CDC" || r.rule == "CDD") {
            jr["alpha_low"] = r.cfg.alpha_low;
            jr["alpha_up"] = r.cfg.alpha_up;
        }
        if (r.rule == "CDD") {
            jr["t"] = r.cfg.t;
            jr["p"] = r.cfg.p;
            jr["freeze_w_below_mean"] = r.cfg.freeze_w_below_mean;
            jr["nested_scale"] = r.nested_scale;
        }
        if (r.rule == "PP") jr["zeta"] = r.zeta;
        if (r.rule == "RMD-Unit" || r.rule == "RM-Beta") jr["weight"] = r.weight;
        if (r.rule == "RM-Beta") {
            jr["robust_a"] = r.robust.a;
            jr["robust_b"] = r.robust.b;
        }
        j["rules"].push_back(jr);
    }
    j["grids"] = {{"conflict", {{"lo", c.grid.conflict_lo},
                                {"hi", c.grid.conflict_hi},
                                {"points", c.grid.points}}},
                  {"deltas", c.grid.deltas}};
    j["engine"] = std::string(estimator_name(c.engine));
    if (c.average.enabled) {
        json s;
        if (c.average.mu_C) {
            s["mu_C"] = *c.average.mu_C;
            if (c.average.n0_C) s["n0_C"] = *c.average.n0_C;
            if (c.average.sigma_C) s["sigma_C"] = *c.average.sigma_C;
        } else {
            s = "analysis";
        }
        j["average"] = {{"sampling", s}};
    }
    if (c.recalibrate.enabled)
        j["recalibrate"] = {{"target_max_tie", c.recalibrate.target_max_tie},
                            {"knob_lo", c.recalibrate.knob_bracket.lo},
                            {"knob_hi", c.recalibrate.knob_bracket.hi}};
    if (c.map.enabled)
        j["map"] = {{"conflict", {{"lo", c.map.conflict.lo},
                                  {"hi", c.map.conflict.hi},
                                  {"points", c.map.conflict_points}}},
                    {"effect", {{"lo", c.map.effect.lo},
                                {"hi", c.map.effect.hi},
                                {"points", c.map.effect_points}}}};
    j["reps"] = c.reps;
    j["seed"] = c.seed;
    return j;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::uint64_t ScenarioConfig::config_hash() const {
    return fnv1a(semantic_json(*this).dump());
}

void ResultTable::sort_rows() {
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
        if (a.rule != b.rule) return a.rule < b.rule;
        if (a.theta_C != b.theta_C) return a.theta_C < b.theta_C;
        if (a.delta != b.delta) return a.delta < b.delta;
        return a.metric < b.metric;
    });
}

std::string ResultTable::to_csv() const {
    std::string out = "scenario_id,rule,theta_C,delta,metric,value,mc_se,estimator,reps\n";
    for (const ResultRow& r : rows) {
        out += r.scenario_id;
        out += ',';
        out += r.rule;
        out += ',';
        out += format_value(r.theta_C);
        out += ',';
        out += format_value(r.delta);
        out += ',';
        out += r.metric;
        out += ',';
        out += format_value(r.value);
        out += ',';
        out += format_value(r.mc_se);
        out += ',';
        out += r.estimator;
        out += ',';
        out += std::to_string(r.reps);
        out += '\n';
    }
    return out;
}

namespace {

DecisionRule make_rule(const RuleSpec& spec) {
    if (spec.rule == "FD") return DecisionRule::fd();
    if (spec.rule == "BD") return DecisionRule::bd();
    if (spec.rule == "CDC") return DecisionRule::cdc(spec.cfg);
    if (spec.rule == "CDD") return DecisionRule::cdd(spec.cfg);
    if (spec.rule == "PP") return DecisionRule::power_prior(spec.zeta);
    if (spec.rule == "EBPowD") return DecisionRule::eb_power();
    if (spec.rule == "RMD-Unit") return DecisionRule::rm_unit(spec.weight);
    throw std::runtime_error("make_rule: unsupported rule " + spec.rule);
}

std::vector<double> theta_grid(const ScenarioConfig& cfg, double mu_C) {
    std::vector<double> grid;
    const int n = cfg.grid.points;
    if (n == 1) {
        grid.push_back(mu_C + 0.5 * (cfg.grid.conflict_lo + cfg.grid.conflict_hi));
        return grid;
    }
    for (int i = 0; i < n; ++i)
        grid.push_back(mu_C + cfg.grid.conflict_lo +
                       (cfg.grid.conflict_hi - cfg.grid.conflict_lo) * i / (n - 1.0));
    return grid;
}

std::string metric_name(const ScenarioConfig& cfg, double delta, bool average) {
    const double delta0 =
        cfg.outcome == Outcome::normal ? cfg.normal_design.delta0 : 0.0;
    const bool null_side = delta <= delta0;
    if (average) return null_side ? "avg_tie" : "avg_power";
    return null_side ? "tie" : "power";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

ResultTable run_normal(const ScenarioConfig& cfg, std::vector<std::string>* notes) {
    const NormalDesign& design = cfg.normal_design;
    const NormalPrior& prior = cfg.normal_prior;
    ResultTable table;

    NormalPrior sampling = prior;
    if (cfg.average.enabled && cfg.average.mu_C) {
        if (cfg.average.n0_C)
            sampling = NormalPrior::from_effective_size(*cfg.average.mu_C, design.sigma,
                                                        *cfg.average.n0_C);
        else {
            sampling.mu_C = *cfg.average.mu_C;
            sampling.sigma_C = *cfg.average.sigma_C;
        }
    }

    const std::vector<double> grid = theta_grid(cfg, prior.mu_C);
    const RngStream base{cfg.seed, 0};

    for (std::size_t rule_idx = 0; rule_idx < cfg.rules.size(); ++rule_idx) {
        const RuleSpec& spec = cfg.rules[rule_idx];
        DecisionRule rule = make_rule(spec);
        bool never_reject = false;

        if (cfg.recalibrate.enabled) {
            const TuningKnob knob = default_knob(rule.kind());
            const RecalibrationResult res = recalibrate_max_tie(
                design, prior, rule, knob, cfg.recalibrate.target_max_tie,
                {cfg.grid.conflict_lo, cfg.grid.conflict_hi}, cfg.grid.points,
                cfg.recalibrate.knob_bracket);
            if (res.attained) {
                rule = apply_knob(rule, knob, res.knob_value);
                table.rows.push_back({cfg.scenario_id, std::string(rule.name()),
                                      prior.mu_C, design.delta0, "threshold",
                                      res.knob_value, 0.0, "quadrature", 0});
            } else {
                never_reject = true;
                if (notes)
                    notes->push_back(std::string(rule.name()) +
                                     ": recalibration target unattainable (" + res.note +
                                     "); curve emitted as never-reject");
            }
        }

        for (std::size_t d_idx = 0; d_idx < cfg.grid.deltas.size(); ++d_idx) {
            const double delta = cfg.grid.deltas[d_idx];
            const std::string metric =
                metric_name(cfg, delta, cfg.average.enabled);
            if (cfg.average.enabled) {
                const double value =
                    never_reject
                        ? 0.0
                        : average_oc(design, prior, rule, sampling, delta);
                table.rows.push_back({cfg.scenario_id, std::string(rule.name()),
                                      sampling.mu_C, delta, metric, value, 0.0,
                                      "quadrature", 0});
                continue;
            }
            if (cfg.engine == Estimator::monte_carlo) {
                for (std::size_t t_idx = 0; t_idx < grid.size(); ++t_idx) {
                    const RngStream stream =
                        base.substream(rule_idx).substream(t_idx).substream(d_idx);
                    if (never_reject) {
                        table.rows.push_back({cfg.scenario_id, std::string(rule.name()),
                                              grid[t_idx], delta, metric, 0.0, 0.0,
                                              "monte_carlo", cfg.reps});
                        continue;
                    }
                    const OCPoint pt = power_rule_mc(design, prior, rule, grid[t_idx],
                                                     grid[t_idx] + delta, cfg.reps,
                                                     stream);
                    table.rows.push_back({cfg.scenario_id, std::string(rule.name()),
                                          pt.theta_C, pt.delta, metric, pt.value,
                                          pt.mc_se, "monte_carlo", pt.reps});
                }
            } else if (cfg.engine == Estimator::closed_form) {
                for (const double theta_C : grid) {
                    double value;
                    if (never_reject) {
                        value = 0.0;
                    } else if (spec.rule == "BD") {
                        value = power_bd_closed(design, {prior, NormalPrior::flat()},
                                                theta_C, theta_C + delta);
                    } else {
                        NormalDesign fd_view = design;
                        fd_view.gamma = rule.effective_kappa(design);
                        value = power_bd_closed(fd_view,
                                                {NormalPrior::flat(), NormalPrior::flat()},
                                                theta_C, theta_C + delta);
                    }
                    table.rows.push_back({cfg.scenario_id, std::string(rule.name()),
                                          theta_C, delta, metric, value, 0.0,
                                          "closed_form", 0});
                }
            } else {
                std::vector<double> values;
                if (never_reject)
                    values.assign(grid.size(), 0.0);
                else
                    values = oc_curve_quadrature(design, prior, rule, grid, delta);
                for (std::size_t t_idx = 0; t_idx < grid.size(); ++t_idx)
                    table.rows.push_back({cfg.scenario_id, std::string(rule.name()),
                                          grid[t_idx], delta, metric, values[t_idx],
                                          0.0, "quadrature", 0});
            }
        }
    }
    return table;
}

ResultTable run_binomial(const ScenarioConfig& cfg) {
    const BinomialDesign& design = cfg.binomial_design;
    ResultTable table;
    const PosteriorTables tables = posterior_tables(design);

    const double mu_C = design.prior_mean_C();
    const std::vector<double> grid = theta_grid(cfg, mu_C);

    for (const RuleSpec& spec : cfg.rules) {
        DecisionTable decisions;
        if (spec.rule == "RM-Beta") {
            BetaMixturePrior mix;
            mix.weight = spec.weight;
            mix.informative = design.informative_prior_C();
            mix.robust = spec.robust;
            const std::vector<double> p_robust =
                prob_null_table(design, spec.robust);
            decisions = mixture_decision_table(design, tables, p_robust, mix);
        } else {
            BinomialRule rule = BinomialRule::fd;
            if (spec.rule == "BD") rule = BinomialRule::bd;
            if (spec.rule == "CDC") rule = BinomialRule::cdc;
            if (spec.rule == "CDD") rule = BinomialRule::cdd;
            decisions = decision_table(design, tables, rule, spec.cfg, spec.nested_scale);
        }
        for (const double delta : cfg.grid.deltas) {
            const std::string metric = delta <= 0.0 ? "tie" : "power";
            for (const double theta_C : grid) {
                double theta_T = theta_C + delta;
                if (theta_T > 1.0 && theta_T <= 1.0 + 1e-9) theta_T = 1.0;  // fp snap
                if (theta_C < 0.0 || theta_C > 1.0 || theta_T > 1.0 || theta_T < 0.0)
                    continue;
                const double value = enumerate_oc(decisions, theta_C, theta_T - theta_C);
                table.rows.push_back({cfg.scenario_id, spec.rule, theta_C, delta,
                                      metric, value, 0.0, "enumeration", 0});
            }
        }
    }
    return table;
}

}  // namespace

std::string manifest_json(const ScenarioConfig& config) {
    json j;
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config.config_hash()));
    j["config_hash"] = hash_hex;
    j["version"] = kVersion;
    j["scenario_id"] = config.scenario_id;
    j["seed"] = config.seed;
    j["reps"] = config.reps;
    j["engine"] = std::string(estimator_name(config.engine));
    j["grid"] = {{"conflict_lo", config.grid.conflict_lo},
                 {"conflict_hi", config.grid.conflict_hi},
                 {"points", config.grid.points},
                 {"deltas", config.grid.deltas}};
    j["rules"] = json::array();
    for (const RuleSpec& r : config.rules) j["rules"].push_back(r.rule);
    return j.dump(2) + "\n";
}

ResultTable run_scenario(const ScenarioConfig& config,
                         const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> notes;
    ResultTable table = config.outcome == Outcome::normal ? run_normal(config, &notes)
                                                          : run_binomial(config);
    table.sort_rows();
    write_file(out_dir / "results.csv", table.to_csv());

    json manifest = json::parse(manifest_json(config));
    if (!notes.empty()) manifest["notes"] = notes;
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return table;
}

void emit_thresholds(const ScenarioConfig& config,
                     const std::filesystem::path& out_dir) {
    if (config.outcome != Outcome::normal)
        throw std::runtime_error("thresholds: supported for normal outcomes only");
    std::filesystem::create_directories(out_dir);
    const NormalDesign& design = config.normal_design;
    const NormalPrior& prior = config.normal_prior;
    const std::vector<double> grid = theta_grid(config, prior.mu_C);

    for (const RuleSpec& spec : config.rules) {
        const DecisionRule rule = make_rule(spec);
        std::string csv = "conflict,critical_z,kappa,gamma\n";
        for (const double ybar_C : grid) {
            const double kappa = rule.kappa_at(design, prior, ybar_C);
            const double gamma = gamma_cd(design, prior, ybar_C, kappa);
            const double clamped = std::clamp(kappa, 1e-300, 1.0 - 1e-16);
            const double z = std_normal_quantile(1.0 - clamped);
            csv += format_value(ybar_C - prior.mu_C);
            csv += ',';
            csv += format_value(z);
            csv += ',';
            csv += format_value(kappa);
            csv += ',';
            csv += format_value(gamma);
            csv += '\n';
        }
        write_file(out_dir / ("thresholds_" + spec.rule + ".csv"), csv);
    }

    if (config.map.enabled) {
        std::vector<double> conflicts(config.map.conflict_points);
        for (int i = 0; i < config.map.conflict_points; ++i)
            conflicts[i] = config.map.conflict.lo +
                           (config.map.conflict.hi - config.map.conflict.lo) * i /
                               std::max(1, config.map.conflict_points - 1);
        std::vector<double> effects(config.map.effect_points);
        for (int i = 0; i < config.map.effect_points; ++i)
            effects[i] = config.map.effect.lo +
                         (config.map.effect.hi - config.map.effect.lo) * i /
                             std::max(1, config.map.effect_points - 1);
        std::vector<DecisionRule> rules;
        for (const RuleSpec& spec : config.rules) rules.push_back(make_rule(spec));
        const PosteriorNullMap map =
            posterior_null_map(design, prior, conflicts, effects, rules);

        std::string csv = "conflict,effect,prob_null\n";
        for (std::size_t i = 0; i < conflicts.size(); ++i)
            for (std::size_t j = 0; j < effects.size(); ++j) {
                csv += format_value(conflicts[i]);
                csv += ',';
                csv += format_value(effects[j]);
                csv += ',';
                csv += format_value(map.prob_null[i * effects.size() + j]);
                csv += '\n';
            }
        write_file(out_dir / "posterior_map.csv", csv);

        std::string bcsv = "rule,conflict,min_effect_rejected\n";
        for (std::size_t r = 0; r < map.rule_names.size(); ++r)
            for (std::size_t i = 0; i < conflicts.size(); ++i) {
                bcsv += map.rule_names[r];
                bcsv += ',';
                bcsv += format_value(conflicts[i]);
                bcsv += ',';
                bcsv += format_value(map.boundaries[r][i]);
                bcsv += '\n';
            }
        write_file(out_dir / "boundaries.csv", bcsv);
    }

    write_file(out_dir / "manifest.json", manifest_json(config));
}

ScenarioConfig case_study_config() {
    ScenarioConfig cfg;
    cfg.scenario_id = "case_study_binomial";
    cfg.outcome = Outcome::binomial;
    cfg.binomial_design.n_C = 200;
    cfg.binomial_design.n_T = 200;
    cfg.binomial_design.prior_C = BetaPrior{0.0, 0.0};  // informative prior is the
    cfg.binomial_design.prior_T = kJeffreys;            // external data itself
    cfg.binomial_design.external = {65, 100};
    cfg.binomial_design.gamma = 0.025;
    cfg.binomial_design.kappa = 0.025;
    cfg.engine = Estimator::enumeration;
    cfg.grid.conflict_lo = -0.35;
    cfg.grid.conflict_hi = 0.35;
    cfg.grid.points = 71;
    cfg.grid.deltas = {0.0, 0.12};

    CompromiseConfig cd;
    cd.alpha_low = 0.01;
    cd.alpha_up = 0.075;
    cd.t = 4.0;
    cd.p = 4.0;

    RuleSpec fd;
    fd.rule = "FD";
    RuleSpec bd;
    bd.rule = "BD";
    RuleSpec cdc;
    cdc.rule = "CDC";
    cdc.cfg = cd;
    RuleSpec cdd;
    cdd.rule = "CDD";
    cdd.cfg = cd;
    RuleSpec rm;
    rm.rule = "RM-Beta";
    rm.weight = 0.7;
    rm.robust = BetaPrior{1.0, 1.0};
    cfg.rules = {fd, bd, cdc, cdd, rm};
    return cfg;
}

ResultTable emit_case_study(const std::filesystem::path& out_dir,
                            double conflict_step) {
    if (!(conflict_step > 0.0))
        throw std::invalid_argument("emit_case_study: step must be > 0");
    ScenarioConfig cfg = case_study_config();
    cfg.grid.points =
        static_cast<int>(std::lround((cfg.grid.conflict_hi - cfg.grid.conflict_lo) /
                                     conflict_step)) + 1;
    return run_scenario(cfg, out_dir);
}

}  // namespace hct
