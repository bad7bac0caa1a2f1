#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "careless/bkfc.hpp"
#include "careless/bkt.hpp"
#include "careless/config.hpp"
#include "careless/event_log.hpp"
#include "careless/features.hpp"
#include "careless/ml_slip.hpp"
#include "careless/pfa.hpp"
#include "careless/stats.hpp"
#include "careless/synth_sim.hpp"

#include "json.hpp"

namespace careless {

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const {
        return {{"config_hash", config_hash}, {"seed", seed}};
    }
    std::string csv_comment() const {
        return "# config_hash=" + config_hash + " seed=" + std::to_string(seed) + "\n";
    }
};

// ---------------------------------------------------------------------------
// Fit stage

struct FitArtifacts {
    FeatureMatrix features;
    PfaFitResult pfa;
    std::vector<PfaEstimate> pfa_estimates;
    BkfcFitResult bkfc;

    // contextual-slip branch; skipped (with reason) on multi-skill datasets
    std::map<SkillId, BktFit> bkt;
    std::string bkt_skipped_reason;
    std::optional<EnsembleModel> ensemble;
    std::optional<CvReport> cv;

    bool has_contextual() const { return bkt_skipped_reason.empty(); }

    std::map<SkillId, BktParams> bkt_params() const {
        std::map<SkillId, BktParams> p;
        for (const auto& [skill, fit] : bkt) p[skill] = fit.params;
        return p;
    }
};

// Labeled rows for the ML contextual slip model: features of the
// slip-estimable incorrect events, labels from the BKT contextual slip model.
inline LabeledRows ml_training_rows(const Dataset& d, const FeatureMatrix& features,
                                    const std::vector<SlipEstimate>& bkt_slip) {
    LabeledRows rows;
    rows.refs.reserve(bkt_slip.size());
    for (const auto& est : bkt_slip) {
        rows.refs.push_back(est.ref);
        rows.rows.push_back(features.row(est.ref));
        rows.y.push_back(est.probability);
    }
    return rows;
}

inline FitArtifacts fit_all(const Dataset& d, const ModelConfig& cfg, unsigned threads = 1) {
    FitArtifacts art;
    art.features = extract_features(d, {.online_z = cfg.online_z});
    art.pfa = fit_pfa(d, cfg.opt);
    art.pfa_estimates = pfa_trace(d, art.pfa.params);
    art.bkfc = fit_bkfc(d, art.pfa_estimates, art.features, cfg.opt);

    if (!d.all_single_skill()) {
        art.bkt_skipped_reason =
            "MultiSkillUnsupported: dataset contains multi-skill items; the contextual slip "
            "pipeline is unavailable";
        return art;
    }
    for (const auto& skill : d.skills) {
        art.bkt[skill] = fit_bkt_grid(d, skill, cfg.grid, threads);
    }
    const auto traces = trace_knowledge(d, art.bkt_params());
    const auto bkt_slip =
        contextual_slip(d, traces, art.bkt_params(), {cfg.condition_on_incorrect});
    const LabeledRows rows = ml_training_rows(d, art.features, bkt_slip);
    if (!rows.refs.empty()) {
        art.ensemble = train_ensemble(rows.rows, rows.y, cfg.ensemble, threads);
        std::size_t labeled_students = 0;
        {
            std::vector<std::uint8_t> seen(d.students.size(), 0);
            for (const auto& ref : rows.refs) seen[ref.student] = 1;
            for (const auto v : seen) labeled_students += v;
        }
        if (labeled_students >= 5) {
            art.cv = crossvalidate(d, rows, 5, cfg.ensemble.seed, cfg.ensemble, threads);
        }
    }
    return art;
}

// ---------------------------------------------------------------------------
// Detect stage

struct DetectArtifacts {
    std::vector<SlipEstimate> bkt_slip;             // slip-estimable events
    std::vector<SlipEstimate> ml_slip;              // same events, model predictions
    std::vector<CarelessnessEstimate> bkfc;         // every incorrect event
    std::vector<SlipEstimate> bkfc_as_slip;         // same, in SlipEstimate shape
};

inline DetectArtifacts detect_all(const Dataset& d, const FitArtifacts& art,
                                  const ModelConfig& cfg, unsigned threads = 1) {
    DetectArtifacts out;
    out.bkfc = score_bkfc(d, art.features, art.bkfc.model, cfg.cdf_mode);
    out.bkfc_as_slip.reserve(out.bkfc.size());
    for (const auto& est : out.bkfc) {
        out.bkfc_as_slip.push_back({est.ref, est.probability, CarelessModel::bkfc});
    }
    if (!art.has_contextual()) return out;

    const auto params = art.bkt_params();
    const auto traces = trace_knowledge(d, params);
    out.bkt_slip = contextual_slip(d, traces, params, {cfg.condition_on_incorrect});
    if (art.ensemble) {
        std::vector<std::array<double, kEncodedWidth>> rows;
        rows.reserve(out.bkt_slip.size());
        for (const auto& est : out.bkt_slip) rows.push_back(art.features.row(est.ref));
        const auto preds = predict(*art.ensemble, rows, threads);
        out.ml_slip.reserve(preds.size());
        for (std::size_t i = 0; i < preds.size(); ++i) {
            out.ml_slip.push_back({out.bkt_slip[i].ref, preds[i], CarelessModel::ml_contextual});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Compare stage

struct ModelRegression {
    bool available = false;
    std::size_t n = 0;
    OlsResult fit;
};

struct CompareReport {
    nlohmann::json json;
};

namespace detail {

inline nlohmann::json spearman_json(const SpearmanResult& r) {
    return {{"rho", r.rho}, {"p", r.p_value}, {"n", r.n}};
}

inline nlohmann::json distribution_json(const DistributionSummary& s) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto c : s.histogram) hist.push_back(c);
    return {{"mean", s.mean},         {"sd", s.sd},
            {"histogram", hist},      {"tail_mass", s.tail_mass},
            {"mid_mass", s.mid_mass}, {"n", s.n}};
}

inline nlohmann::json ols_json(const OlsResult& r, const std::vector<std::string>& names,
                               std::size_t n) {
    nlohmann::json coefs;
    for (std::size_t i = 0; i < r.coefficients.size(); ++i) {
        const auto& c = r.coefficients[i];
        coefs[names[i]] = {{"b", c.b}, {"se", c.se}, {"t", c.t}, {"p", c.p}};
    }
    return {{"r_squared", r.r_squared},
            {"f", r.f_statistic},
            {"f_p", r.f_p_value},
            {"df", r.df},
            {"n", n},
            {"coefficients", coefs}};
}

// event-level estimates of two models joined on EventRef
inline std::pair<std::vector<double>, std::vector<double>> join_estimates(
    const std::vector<SlipEstimate>& a, const std::vector<SlipEstimate>& b) {
    std::map<EventRef, double> bm;
    for (const auto& e : b) bm[e.ref] = e.probability;
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& e : a) {
        const auto it = bm.find(e.ref);
        if (it != bm.end()) {
            out.first.push_back(e.probability);
            out.second.push_back(it->second);
        }
    }
    return out;
}

}  // namespace detail

// Regression of a raw-scale outcome on [final knowledge, student-mean
// carelessness] over students holding scores and at least one estimate.
inline ModelRegression carelessness_regression(
    const Dataset& d, const std::map<std::string, double>& final_knowledge,
    const StudentMeans& carelessness, bool delayed) {
    ModelRegression out;
    std::vector<double> y;
    std::vector<double> knowledge;
    std::vector<double> care;
    for (const auto& student : d.students) {
        if (!student.has_scores) continue;
        const auto fk = final_knowledge.find(student.student_id);
        const auto cm = carelessness.mean_by_student.find(student.student_id);
        if (fk == final_knowledge.end() || cm == carelessness.mean_by_student.end()) continue;
        y.push_back((delayed ? student.delayed_posttest : student.posttest) *
                    d.metadata.score_max);
        knowledge.push_back(fk->second);
        care.push_back(cm->second);
    }
    if (y.size() < 4) return out;
    out.n = y.size();
    out.fit = ols(y, {knowledge, care});
    out.available = true;
    return out;
}

// Assembles the comparison report: pairwise correlations between the models'
// event-level estimates on the common subset, post-test regressions
// controlling for final knowledge, correlations against external measures
// when provided, per-model distribution summaries, and ground-truth validity
// metrics when generator truth is available.
inline CompareReport compare(const Dataset& d, const FitArtifacts& art,
                             const DetectArtifacts& det, const ModelConfig& cfg,
                             const GroundTruth* truth, const Provenance& prov) {
    nlohmann::json j;
    j["provenance"] = prov.to_json();

    const auto split = split_correct_incorrect(d);
    j["counts"] = {{"events", d.n_events()},
                   {"correct", split.correct.size()},
                   {"incorrect", split.incorrect.size()},
                   {"students", d.students.size()}};

    const bool has_ctx = art.has_contextual();
    if (!has_ctx) j["contextual_slip_skipped"] = art.bkt_skipped_reason;

    // comparison subset: events every model can score
    std::vector<SlipEstimate> bkfc_common;
    if (has_ctx) {
        std::set<EventRef> estimable;
        for (const auto& e : det.bkt_slip) estimable.insert(e.ref);
        for (const auto& e : det.bkfc_as_slip) {
            if (estimable.count(e.ref)) bkfc_common.push_back(e);
        }
        j["counts"]["slip_estimable"] = det.bkt_slip.size();
    } else {
        bkfc_common = det.bkfc_as_slip;
    }

    // pairwise Spearman between models (event level, common subset)
    if (has_ctx && !det.bkt_slip.empty()) {
        nlohmann::json pw;
        auto add_pair = [&](const char* key, const std::vector<SlipEstimate>& a,
                            const std::vector<SlipEstimate>& b) {
            const auto joined = detail::join_estimates(a, b);
            if (joined.first.size() >= 3) {
                try {
                    pw[key] = detail::spearman_json(spearman(joined.first, joined.second));
                } catch (const ConstantInput&) {
                    pw[key] = {{"error", "ConstantInput"}};
                }
            }
        };
        if (!det.ml_slip.empty()) add_pair("bkt_vs_ml", det.bkt_slip, det.ml_slip);
        add_pair("bkt_vs_bkfc", det.bkt_slip, bkfc_common);
        if (!det.ml_slip.empty()) add_pair("ml_vs_bkfc", det.ml_slip, bkfc_common);
        j["pairwise_spearman"] = pw;
    }

    // distribution summaries over the comparison subset
    {
        nlohmann::json dist;
        auto values = [](const std::vector<SlipEstimate>& v) {
            std::vector<double> out;
            out.reserve(v.size());
            for (const auto& e : v) out.push_back(e.probability);
            return out;
        };
        if (has_ctx && !det.bkt_slip.empty()) {
            dist["bkt_contextual"] =
                detail::distribution_json(summarize_distribution(values(det.bkt_slip)));
            if (!det.ml_slip.empty()) {
                dist["ml_contextual"] =
                    detail::distribution_json(summarize_distribution(values(det.ml_slip)));
            }
        }
        dist["bkfc"] = detail::distribution_json(summarize_distribution(values(bkfc_common)));
        dist["bkfc_all_incorrect"] =
            detail::distribution_json(summarize_distribution(values(det.bkfc_as_slip)));
        j["distributions"] = dist;
    }

    // student-level means and the learning regressions
    std::map<SkillId, BktParams> bkt_params;
    std::optional<KnowledgeTrace> traces;
    std::map<std::string, double> fk_bkt;
    if (has_ctx) {
        bkt_params = art.bkt_params();
        traces = trace_knowledge(d, bkt_params);
        fk_bkt = final_knowledge_bkt(*traces, d, {cfg.bkt_final_use_posterior});
    }
    const auto fk_pfa = final_knowledge_pfa(art.pfa_estimates, d);

    const auto sm_bkt = has_ctx ? student_level_carelessness(det.bkt_slip, d) : StudentMeans{};
    const auto sm_ml = has_ctx && !det.ml_slip.empty()
                           ? student_level_carelessness(det.ml_slip, d)
                           : StudentMeans{};
    const auto sm_bkfc = student_level_carelessness(det.bkfc_as_slip, d);

    {
        nlohmann::json regressions;
        const std::vector<std::string> names = {"intercept", "final_knowledge", "carelessness"};
        auto add_model = [&](const char* key, const std::map<std::string, double>& fk,
                             const StudentMeans& sm) {
            nlohmann::json block;
            for (const bool delayed : {false, true}) {
                const auto reg = carelessness_regression(d, fk, sm, delayed);
                if (reg.available) {
                    block[delayed ? "delayed_posttest" : "posttest"] =
                        detail::ols_json(reg.fit, names, reg.n);
                }
            }
            block["excluded_students"] = sm.excluded.size();
            regressions[key] = block;
        };
        if (has_ctx && !det.bkt_slip.empty()) {
            add_model("bkt_contextual", fk_bkt, sm_bkt);
            if (!det.ml_slip.empty()) add_model("ml_contextual", fk_bkt, sm_ml);
        }
        add_model("bkfc", fk_pfa, sm_bkfc);
        j["regressions"] = regressions;
    }

    // external measures (gaming / confrustion) when provided
    {
        std::vector<std::pair<const char*, const StudentMeans*>> models;
        if (has_ctx && !det.bkt_slip.empty()) models.emplace_back("bkt_contextual", &sm_bkt);
        if (has_ctx && !det.ml_slip.empty()) models.emplace_back("ml_contextual", &sm_ml);
        models.emplace_back("bkfc", &sm_bkfc);
        nlohmann::json ext;
        bool any = false;
        for (const char* measure : {"gaming", "confrustion"}) {
            for (const auto& [key, sm] : models) {
                std::vector<double> care;
                std::vector<double> value;
                for (const auto& student : d.students) {
                    const auto cm = sm->mean_by_student.find(student.student_id);
                    if (cm == sm->mean_by_student.end()) continue;
                    const auto& opt = measure == std::string("gaming")
                                          ? student.gaming_measure
                                          : student.confrustion_measure;
                    if (!opt) continue;
                    care.push_back(cm->second);
                    value.push_back(*opt);
                }
                if (care.size() >= 3) {
                    try {
                        ext[measure][key] = detail::spearman_json(spearman(care, value));
                        any = true;
                    } catch (const ConstantInput&) {
                    }
                }
            }
        }
        if (any) j["external_measures"] = ext;
    }

    // generator truth, when simulating
    if (truth != nullptr) {
        nlohmann::json validity;
        std::size_t careless_behaviors = 0;
        std::size_t careless_errors = 0;
        for (const auto& per_student : truth->events) {
            for (const auto& t : per_student) {
                careless_behaviors += t.careless_behavior ? 1 : 0;
                careless_errors += t.careless_error ? 1 : 0;
            }
        }
        validity["true_careless_behaviors"] = careless_behaviors;
        validity["true_careless_errors"] = careless_errors;

        if (has_ctx && !det.bkt_slip.empty()) {
            double sum_known = 0.0;
            std::size_t n_known = 0;
            double sum_unknown = 0.0;
            std::size_t n_unknown = 0;
            for (const auto& est : det.bkt_slip) {
                const auto& t = truth->events[est.ref.student][est.ref.event];
                if (t.careless_error && t.all_skills_known) {
                    sum_known += est.probability;
                    ++n_known;
                } else if (!t.all_skills_known) {
                    sum_unknown += est.probability;
                    ++n_unknown;
                }
            }
            if (n_known > 0 && n_unknown > 0) {
                validity["bkt_slip_mean_on_knowledgeable_careless"] =
                    sum_known / static_cast<double>(n_known);
                validity["bkt_slip_mean_on_unknowledgeable_errors"] =
                    sum_unknown / static_cast<double>(n_unknown);
            }
        }
        {
            std::vector<double> est;
            std::vector<double> rate;
            for (std::size_t s = 0; s < d.students.size(); ++s) {
                const auto it = sm_bkfc.mean_by_student.find(d.students[s].student_id);
                if (it == sm_bkfc.mean_by_student.end()) continue;
                est.push_back(it->second);
                rate.push_back(truth->students[s].drawn_careless_rate);
            }
            if (est.size() >= 3) {
                try {
                    validity["bkfc_vs_true_rate"] = detail::spearman_json(spearman(est, rate));
                } catch (const ConstantInput&) {
                }
            }
        }
        j["ground_truth_validity"] = validity;
    }

    CompareReport report;
    report.json = std::move(j);
    return report;
}

// ---------------------------------------------------------------------------
// Artifact serialization

inline nlohmann::json bkt_params_json(const FitArtifacts& art, const Provenance& prov) {
    nlohmann::json j;
    j["provenance"] = prov.to_json();
    if (!art.has_contextual()) {
        j["skipped"] = art.bkt_skipped_reason;
        return j;
    }
    nlohmann::json skills;
    for (const auto& [skill, fit] : art.bkt) {
        skills[skill] = {{"L0", fit.params.L0}, {"T", fit.params.T},   {"G", fit.params.G},
                         {"S", fit.params.S},   {"sse", fit.sse},      {"n_obs", fit.n_obs}};
    }
    j["skills"] = skills;
    return j;
}

inline std::map<SkillId, BktParams> bkt_params_from_json(const nlohmann::json& j) {
    std::map<SkillId, BktParams> out;
    if (!j.contains("skills")) return out;
    for (const auto& [skill, pj] : j["skills"].items()) {
        out[skill] = {pj.at("L0").get<double>(), pj.at("T").get<double>(),
                      pj.at("G").get<double>(), pj.at("S").get<double>()};
    }
    return out;
}

inline nlohmann::json pfa_params_json(const PfaFitResult& fit, const Provenance& prov) {
    nlohmann::json j;
    j["provenance"] = prov.to_json();
    nlohmann::json skills;
    for (const auto& [skill, p] : fit.params.by_skill) {
        skills[skill] = {{"beta", p.beta}, {"gamma", p.gamma}, {"rho", p.rho}};
    }
    j["skills"] = skills;
    j["diagnostics"] = {{"log_lik", fit.log_lik},
                        {"grad_norm", fit.grad_norm},
                        {"iterations", fit.iterations},
                        {"separation_warning", fit.separation_warning}};
    return j;
}

inline PfaParams pfa_params_from_json(const nlohmann::json& j) {
    PfaParams out;
    for (const auto& [skill, pj] : j.at("skills").items()) {
        out.by_skill[skill] = {pj.at("beta").get<double>(), pj.at("gamma").get<double>(),
                               pj.at("rho").get<double>()};
    }
    return out;
}

inline nlohmann::json bkfc_model_json(const BkfcFitResult& fit, const Provenance& prov) {
    nlohmann::json j;
    j["provenance"] = prov.to_json();
    j["beta0"] = fit.model.beta0 ? nlohmann::json(*fit.model.beta0) : nlohmann::json(nullptr);
    j["beta1"] = fit.model.beta1 ? nlohmann::json(*fit.model.beta1) : nlohmann::json(nullptr);
    nlohmann::json coefs = nlohmann::json::array();
    const auto& manifest = feature_manifest();
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        coefs.push_back({{"feature", manifest[i]}, {"value", fit.model.omega_betas[i]}});
    }
    j["coefficients"] = coefs;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fit.model.manifest_hash));
    j["manifest_hash"] = buf;
    j["diagnostics"] = {{"log_lik", fit.log_lik},
                        {"grad_norm", fit.grad_norm},
                        {"iterations", fit.iterations},
                        {"separation_warning", fit.separation_warning},
                        {"collinearity_warning", fit.collinearity_warning},
                        {"condition_number", fit.condition_number}};
    return j;
}

inline nlohmann::json ensemble_json(const EnsembleModel& model, const Provenance& prov) {
    nlohmann::json j;
    j["provenance"] = prov.to_json();
    j["seed"] = model.bootstrap_seed;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(model.manifest_hash));
    j["manifest_hash"] = buf;
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree.nodes) {
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

inline EnsembleModel ensemble_from_json(const nlohmann::json& j) {
    EnsembleModel model;
    model.bootstrap_seed = j.value("seed", 0ULL);
    model.manifest_hash = feature_manifest_hash();
    for (const auto& tj : j.at("trees")) {
        RegressionTree tree;
        for (const auto& nj : tj) {
            TreeNode n;
            n.feature = nj.at(0).get<int>();
            n.threshold = nj.at(1).get<double>();
            n.left = nj.at(2).get<int>();
            n.right = nj.at(3).get<int>();
            n.value = nj.at(4).get<double>();
            tree.nodes.push_back(n);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

inline nlohmann::json cv_report_json(const CvReport& cv, const Provenance& prov) {
    nlohmann::json j;
    j["provenance"] = prov.to_json();
    j["k"] = cv.per_fold_rmse.size();
    j["per_fold_rmse"] = cv.per_fold_rmse;
    j["pooled_rmse"] = cv.pooled_rmse;
    j["baseline_rmse"] = cv.baseline_rmse;
    j["n_rows"] = cv.n_rows;
    nlohmann::json folds;
    for (const auto& [student, fold] : cv.fold_of_student) folds[student] = fold;
    j["fold_of_student"] = folds;
    // the original study reported 0.200 on its own (private) dataset; kept
    // here as a reference point, not a reproducible target
    j["reference_rmse_original_study"] = 0.200;
    return j;
}

// estimates CSV: student_id, seq_index, skill, p, model [, omega]
inline std::string serialize_estimates(const Dataset& d, const std::vector<SlipEstimate>& est,
                                       const Provenance& prov,
                                       const std::vector<CarelessnessEstimate>* omegas = nullptr) {
    std::string out = prov.csv_comment();
    out += "student_id,seq_index,skill,p_careless,model";
    if (omegas != nullptr) out += ",omega";
    out += '\n';
    for (std::size_t i = 0; i < est.size(); ++i) {
        const auto& e = est[i];
        const auto& ev = event_at(d, e.ref);
        std::string skills;
        for (std::size_t k = 0; k < ev.skills.size(); ++k) {
            if (k) skills += ';';
            skills += ev.skills[k];
        }
        out += csv_escape(ev.student_id);
        out += ',';
        out += std::to_string(ev.seq_index);
        out += ',';
        out += csv_escape(skills);
        out += ',';
        out += format_double(e.probability);
        out += ',';
        out += to_string(e.model);
        if (omegas != nullptr) {
            out += ',';
            out += format_double((*omegas)[i].omega);
        }
        out += '\n';
    }
    return out;
}

inline std::vector<SlipEstimate> parse_estimates(const Dataset& d, std::string_view csv_text) {
    const CsvTable table = parse_csv(csv_text);
    const std::size_t c_sid = table.column("student_id");
    const std::size_t c_seq = table.column("seq_index");
    const std::size_t c_p = table.column("p_careless");
    const std::size_t c_model = table.column("model");
    if (c_sid == CsvTable::npos || c_seq == CsvTable::npos || c_p == CsvTable::npos ||
        c_model == CsvTable::npos) {
        throw SchemaError("estimates CSV missing a required column");
    }
    std::map<std::string, std::size_t> by_id;
    for (std::size_t s = 0; s < d.students.size(); ++s) by_id[d.students[s].student_id] = s;
    std::vector<SlipEstimate> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto it = by_id.find(row[c_sid]);
        if (it == by_id.end()) throw SchemaError("estimate references unknown student");
        SlipEstimate e;
        e.ref.student = it->second;
        e.ref.event =
            static_cast<std::size_t>(detail::parse_int(row[c_seq], r + 2, "seq_index"));
        if (e.ref.event >= d.students[it->second].events.size()) {
            throw SchemaError("estimate seq_index out of range");
        }
        e.probability = detail::parse_real(row[c_p], r + 2, "p_careless");
        const std::string& model = row[c_model];
        e.model = model == "bkt_contextual" ? CarelessModel::bkt_contextual
                  : model == "ml_contextual" ? CarelessModel::ml_contextual
                                             : CarelessModel::bkfc;
        out.push_back(e);
    }
    return out;
}

}  // namespace careless
