#pragma once

#include <cstdint>
#include <string>

#include "careless/bkfc.hpp"
#include "careless/bkt.hpp"
#include "careless/ml_slip.hpp"
#include "careless/pfa.hpp"
#include "careless/rng.hpp"
#include "careless/synth_sim.hpp"

#include "json.hpp"

namespace careless {

struct ModelConfig {
    GridSpec grid;
    OptSpec opt;                 // shared by the PFA and BKFC fits
    EnsembleConfig ensemble;
    CdfMode cdf_mode = CdfMode::raw;
    bool condition_on_incorrect = false;
    bool online_z = false;
    bool bkt_final_use_posterior = false;
};

struct RunConfig {
    std::string log_csv;
    std::string scores_csv;
    std::string out_dir = "out";
    double score_max = 24.0;
    std::uint64_t seed = 7;
    unsigned threads = 0;  // 0 = hardware concurrency
    ModelConfig model;
    SimConfig sim = default_sim_config();
};

// ---------------------------------------------------------------------------
// JSON round trip (missing keys take defaults; unknown keys are ignored)

inline nlohmann::json to_json(const SimConfig& cfg) {
    nlohmann::json j;
    j["n_students"] = cfg.n_students;
    j["careless_rate"] = cfg.careless_rate;
    j["careless_rate_spread"] = cfg.careless_rate_spread;
    j["careless_speed_factor"] = cfg.careless_speed_factor;
    j["careless_forces_error_prob"] = cfg.careless_forces_error_prob;
    j["knowledge_gated_carelessness"] = cfg.knowledge_gated_carelessness;
    j["careless_inhibits_learning"] = cfg.careless_inhibits_learning;
    j["posttest_noise_sd"] = cfg.posttest_noise_sd;
    j["seed"] = cfg.seed;
    nlohmann::json skills = nlohmann::json::array();
    for (const auto& sk : cfg.skills) {
        skills.push_back({{"id", sk.id},
                          {"L0", sk.true_params.L0},
                          {"T", sk.true_params.T},
                          {"G", sk.true_params.G},
                          {"S", sk.true_params.S}});
    }
    j["skills"] = skills;
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : cfg.curriculum) {
        items.push_back({{"question_id", item.question_id},
                         {"skills", item.skills},
                         {"input_type", to_string(item.input_type)},
                         {"actions_required", to_string(item.actions_required)},
                         {"gaming_options", to_string(item.gaming_options)},
                         {"duration_log_mean", item.duration_log_mean},
                         {"duration_log_sd", item.duration_log_sd}});
    }
    j["curriculum"] = items;
    return j;
}

inline SimConfig sim_config_from_json(const nlohmann::json& j) {
    SimConfig cfg;
    cfg.skills.clear();
    cfg.curriculum.clear();
    cfg.n_students = j.value("n_students", cfg.n_students);
    cfg.careless_rate = j.value("careless_rate", cfg.careless_rate);
    cfg.careless_rate_spread = j.value("careless_rate_spread", cfg.careless_rate_spread);
    cfg.careless_speed_factor = j.value("careless_speed_factor", cfg.careless_speed_factor);
    cfg.careless_forces_error_prob =
        j.value("careless_forces_error_prob", cfg.careless_forces_error_prob);
    cfg.knowledge_gated_carelessness =
        j.value("knowledge_gated_carelessness", cfg.knowledge_gated_carelessness);
    cfg.careless_inhibits_learning =
        j.value("careless_inhibits_learning", cfg.careless_inhibits_learning);
    cfg.posttest_noise_sd = j.value("posttest_noise_sd", cfg.posttest_noise_sd);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("skills")) {
        for (const auto& sj : j["skills"]) {
            SkillSpec sk;
            sk.id = sj.at("id").get<std::string>();
            sk.true_params.L0 = sj.value("L0", 0.3);
            sk.true_params.T = sj.value("T", 0.1);
            sk.true_params.G = sj.value("G", 0.2);
            sk.true_params.S = sj.value("S", 0.08);
            cfg.skills.push_back(sk);
        }
    }
    if (j.contains("curriculum")) {
        for (const auto& ij : j["curriculum"]) {
            ItemTemplate item;
            item.question_id = ij.at("question_id").get<std::string>();
            item.skills = ij.at("skills").get<std::vector<std::string>>();
            const std::string input = ij.value("input_type", "slider");
            item.input_type = input == "radio"  ? InputType::radio
                              : input == "text" ? InputType::text
                                                : InputType::slider;
            item.actions_required = ij.value("actions_required", "one") == std::string("one")
                                        ? ActionsRequired::one
                                        : ActionsRequired::multiple;
            item.gaming_options = ij.value("gaming_options", "multiple") == std::string("multiple")
                                      ? GamingOptions::multiple
                                      : GamingOptions::limited;
            item.duration_log_mean = ij.value("duration_log_mean", item.duration_log_mean);
            item.duration_log_sd = ij.value("duration_log_sd", item.duration_log_sd);
            cfg.curriculum.push_back(item);
        }
    }
    return cfg;
}

inline nlohmann::json to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["grid"] = {{"l0", {cfg.grid.l0.lo, cfg.grid.l0.hi}},
                 {"t", {cfg.grid.t.lo, cfg.grid.t.hi}},
                 {"g", {cfg.grid.g.lo, cfg.grid.g.hi}},
                 {"s", {cfg.grid.s.lo, cfg.grid.s.hi}},
                 {"coarse_step", cfg.grid.coarse_step},
                 {"refine_step", cfg.grid.refine_step}};
    j["opt"] = {{"tol", cfg.opt.tol},
                {"max_iter", cfg.opt.max_iter},
                {"param_cap", cfg.opt.param_cap}};
    j["ensemble"] = {{"n_trees", cfg.ensemble.n_trees},
                     {"seed", cfg.ensemble.seed},
                     {"bootstrap", cfg.ensemble.bootstrap},
                     {"min_leaf", cfg.ensemble.min_leaf}};
    j["cdf_mode"] = cfg.cdf_mode == CdfMode::raw ? "raw" : "standardized";
    j["condition_on_incorrect"] = cfg.condition_on_incorrect;
    j["online_z"] = cfg.online_z;
    j["bkt_final_use_posterior"] = cfg.bkt_final_use_posterior;
    return j;
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        auto range = [&](const char* key, GridRange def) {
            if (!g.contains(key)) return def;
            const auto& r = g[key];
            return GridRange{r.at(0).get<double>(), r.at(1).get<double>()};
        };
        cfg.grid.l0 = range("l0", cfg.grid.l0);
        cfg.grid.t = range("t", cfg.grid.t);
        cfg.grid.g = range("g", cfg.grid.g);
        cfg.grid.s = range("s", cfg.grid.s);
        cfg.grid.coarse_step = g.value("coarse_step", cfg.grid.coarse_step);
        cfg.grid.refine_step = g.value("refine_step", cfg.grid.refine_step);
    }
    if (j.contains("opt")) {
        const auto& o = j["opt"];
        cfg.opt.tol = o.value("tol", cfg.opt.tol);
        cfg.opt.max_iter = o.value("max_iter", cfg.opt.max_iter);
        cfg.opt.param_cap = o.value("param_cap", cfg.opt.param_cap);
    }
    if (j.contains("ensemble")) {
        const auto& e = j["ensemble"];
        cfg.ensemble.n_trees = e.value("n_trees", cfg.ensemble.n_trees);
        cfg.ensemble.seed = e.value("seed", cfg.ensemble.seed);
        cfg.ensemble.bootstrap = e.value("bootstrap", cfg.ensemble.bootstrap);
        cfg.ensemble.min_leaf = e.value("min_leaf", cfg.ensemble.min_leaf);
    }
    cfg.cdf_mode =
        j.value("cdf_mode", "raw") == std::string("standardized") ? CdfMode::standardized
                                                                  : CdfMode::raw;
    cfg.condition_on_incorrect = j.value("condition_on_incorrect", cfg.condition_on_incorrect);
    cfg.online_z = j.value("online_z", cfg.online_z);
    cfg.bkt_final_use_posterior = j.value("bkt_final_use_posterior", cfg.bkt_final_use_posterior);
    return cfg;
}

inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["paths"] = {{"log_csv", cfg.log_csv}, {"scores_csv", cfg.scores_csv}, {"out_dir", cfg.out_dir}};
    j["score_max"] = cfg.score_max;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["model"] = to_json(cfg.model);
    j["sim"] = to_json(cfg.sim);
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        cfg.log_csv = p.value("log_csv", cfg.log_csv);
        cfg.scores_csv = p.value("scores_csv", cfg.scores_csv);
        cfg.out_dir = p.value("out_dir", cfg.out_dir);
    }
    cfg.score_max = j.value("score_max", cfg.score_max);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("model")) cfg.model = model_config_from_json(j["model"]);
    if (j.contains("sim")) cfg.sim = sim_config_from_json(j["sim"]);
    return cfg;
}

// Content hash of the effective configuration; embedded in every output file.
inline std::string config_hash(const RunConfig& cfg) {
    const std::string canonical = to_json(cfg).dump();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64_str(canonical)));
    return buf;
}

}  // namespace careless
