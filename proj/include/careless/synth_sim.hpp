#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "careless/bkt.hpp"
#include "careless/errors.hpp"
#include "careless/event_log.hpp"
#include "careless/parallel.hpp"
#include "careless/rng.hpp"

namespace careless {

struct ItemTemplate {
    std::string question_id;
    std::vector<SkillId> skills;  // 1..k skills
    InputType input_type = InputType::slider;
    ActionsRequired actions_required = ActionsRequired::one;
    GamingOptions gaming_options = GamingOptions::multiple;
    double duration_log_mean = 2.7;  // lognormal mu, log-seconds
    double duration_log_sd = 0.5;    // lognormal sigma
};

struct SkillSpec {
    SkillId id;
    BktParams true_params;
};

struct SimConfig {
    std::size_t n_students = 200;
    std::vector<SkillSpec> skills;
    std::vector<ItemTemplate> curriculum;

    // Carelessness generator. Each student draws a personal rate from a Beta
    // distribution with mean careless_rate and SD careless_rate_spread
    // (spread 0 makes every student share the base rate).
    double careless_rate = 0.12;
    double careless_rate_spread = 0.07;
    double careless_speed_factor = 0.5;       // duration multiplier when careless
    double careless_forces_error_prob = 1.0;  // P(incorrect | careless behavior)
    bool knowledge_gated_carelessness = false;  // careless acts only in known state
    bool careless_inhibits_learning = true;   // careless action yields no transition

    double posttest_noise_sd = 1.5;  // on the raw 0..24 score scale
    std::uint64_t seed = 7;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;

    friend bool operator==(const ItemTemplate&, const ItemTemplate&) = default;
    friend bool operator==(const SkillSpec&, const SkillSpec&) = default;
};

// Per-event latent state the generator knows but the log does not.
struct EventTruth {
    bool careless_behavior = false;
    bool counterfactual_correct = false;  // outcome of the same non-careless draw
    bool careless_error = false;          // filled by label_counterfactuals
    bool all_skills_known = false;
    std::vector<std::uint8_t> skills_known;  // aligned to the event's skill list
};

struct StudentTruth {
    double drawn_careless_rate = 0.0;
    double realized_careless_rate = 0.0;
    std::map<SkillId, bool> final_knowledge;
    double mean_final_knowledge = 0.0;
};

struct GroundTruth {
    std::vector<std::vector<EventTruth>> events;  // [student][event]
    std::vector<StudentTruth> students;
};

namespace detail {

inline void validate(const SimConfig& cfg) {
    if (cfg.n_students < 1) throw InvalidConfig("n_students must be >= 1");
    if (cfg.curriculum.empty()) throw InvalidConfig("curriculum is empty");
    if (cfg.skills.empty()) throw InvalidConfig("no skills configured");
    auto prob = [](double v, const char* what) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidConfig(std::string(what) + " outside [0,1]");
    };
    prob(cfg.careless_rate, "careless_rate");
    prob(cfg.careless_forces_error_prob, "careless_forces_error_prob");
    if (!(cfg.careless_speed_factor > 0.0 && cfg.careless_speed_factor <= 1.0)) {
        throw InvalidConfig("careless_speed_factor outside (0,1]");
    }
    if (cfg.posttest_noise_sd < 0.0) throw InvalidConfig("posttest_noise_sd negative");
    if (cfg.careless_rate_spread < 0.0) throw InvalidConfig("careless_rate_spread negative");
    std::map<SkillId, bool> seen;
    for (const auto& sk : cfg.skills) {
        if (sk.id.empty()) throw InvalidConfig("empty skill id");
        if (seen.count(sk.id)) throw InvalidConfig("duplicate skill id: " + sk.id);
        seen[sk.id] = true;
        prob(sk.true_params.L0, "L0");
        prob(sk.true_params.T, "T");
        prob(sk.true_params.G, "G");
        prob(sk.true_params.S, "S");
    }
    for (const auto& item : cfg.curriculum) {
        if (item.skills.empty()) throw InvalidConfig("item with no skills: " + item.question_id);
        for (const auto& sk : item.skills) {
            if (!seen.count(sk)) throw InvalidConfig("item references unknown skill: " + sk);
        }
        if (item.duration_log_sd < 0.0) throw InvalidConfig("duration_log_sd negative");
    }
}

inline double draw_student_rate(const SimConfig& cfg, std::mt19937_64& rng) {
    const double m = cfg.careless_rate;
    const double sd = cfg.careless_rate_spread;
    if (sd <= 0.0 || m <= 0.0 || m >= 1.0) return m;
    const double max_var = m * (1.0 - m);
    const double var = std::min(sd * sd, 0.9 * max_var);
    const double k = max_var / var - 1.0;  // Beta concentration from mean/variance
    std::gamma_distribution<double> ga(m * k, 1.0);
    std::gamma_distribution<double> gb((1.0 - m) * k, 1.0);
    const double a = ga(rng);
    const double b = gb(rng);
    if (a + b == 0.0) return m;
    return a / (a + b);
}

}  // namespace detail

// Fills careless_error: a careless behavior whose non-careless draw would have
// produced a correct answer, on an event that actually came out incorrect.
inline void label_counterfactuals(const Dataset& d, GroundTruth& truth) {
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        const auto& events = d.students[s].events;
        for (std::size_t e = 0; e < events.size(); ++e) {
            EventTruth& t = truth.events[s][e];
            t.careless_error = t.careless_behavior && t.counterfactual_correct &&
                               !events[e].first_attempt_correct;
        }
    }
}

struct SimResult {
    Dataset dataset;
    GroundTruth truth;
};

// Generative model: per skill, initial knowledge ~ Bernoulli(L0); after each
// opportunity an unknown skill becomes known with probability T (no
// forgetting). Careless behavior is drawn per action; it forces an incorrect
// answer with probability careless_forces_error_prob and shortens the drawn
// duration by careless_speed_factor. Otherwise a known state answers
// correctly with 1-S and an unknown state with G (multi-skill items require
// every tagged skill; S and G average over the item's skills). Students are
// simulated on independent derived RNG streams, so output is identical for
// every thread count.
inline SimResult simulate(const SimConfig& cfg, unsigned threads = 1) {
    detail::validate(cfg);

    std::map<SkillId, BktParams> skill_params;
    for (const auto& sk : cfg.skills) skill_params[sk.id] = sk.true_params;

    SimResult result;
    result.dataset.metadata.source = "synthetic";
    result.dataset.metadata.generation_seed = cfg.seed;
    result.dataset.metadata.score_max = 24.0;
    for (const auto& sk : cfg.skills) result.dataset.skills.insert(sk.id);
    result.dataset.students.resize(cfg.n_students);
    result.truth.events.resize(cfg.n_students);
    result.truth.students.resize(cfg.n_students);

    parallel_for(cfg.n_students, threads, [&](std::size_t si) {
        auto rng = make_rng(cfg.seed, si);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        StudentRecord student;
        char sid[16];
        std::snprintf(sid, sizeof(sid), "s%04zu", si);
        student.student_id = sid;

        StudentTruth strue;
        strue.drawn_careless_rate = detail::draw_student_rate(cfg, rng);

        std::map<SkillId, bool> known;
        double initial_known = 0.0;
        for (const auto& sk : cfg.skills) {
            known[sk.id] = unit(rng) < sk.true_params.L0;
            initial_known += known[sk.id] ? 1.0 : 0.0;
        }
        initial_known /= static_cast<double>(cfg.skills.size());

        std::vector<EventTruth> truths;
        std::int64_t clock_ms = 1'000'000;
        std::size_t careless_count = 0;

        for (std::size_t qi = 0; qi < cfg.curriculum.size(); ++qi) {
            const ItemTemplate& item = cfg.curriculum[qi];

            bool all_known = true;
            double mean_s = 0.0;
            double mean_g = 0.0;
            EventTruth t;
            for (const auto& sk : item.skills) {
                const bool k = known[sk];
                t.skills_known.push_back(k ? 1 : 0);
                all_known = all_known && k;
                mean_s += skill_params[sk].S;
                mean_g += skill_params[sk].G;
            }
            mean_s /= static_cast<double>(item.skills.size());
            mean_g /= static_cast<double>(item.skills.size());
            t.all_skills_known = all_known;

            bool careless = unit(rng) < strue.drawn_careless_rate;
            if (cfg.knowledge_gated_carelessness && !all_known) careless = false;
            t.careless_behavior = careless;
            if (careless) ++careless_count;

            std::lognormal_distribution<double> dur_dist(item.duration_log_mean,
                                                         item.duration_log_sd);
            double duration = dur_dist(rng);
            if (careless) duration *= cfg.careless_speed_factor;

            const double outcome_draw = unit(rng);
            const bool potential_correct =
                all_known ? outcome_draw < 1.0 - mean_s : outcome_draw < mean_g;
            t.counterfactual_correct = potential_correct;

            bool correct = potential_correct;
            if (careless) {
                const bool forced = cfg.careless_forces_error_prob >= 1.0 ||
                                    unit(rng) < cfg.careless_forces_error_prob;
                if (forced) correct = false;
            }

            QuestionEvent ev;
            ev.student_id = student.student_id;
            ev.question_id = item.question_id;
            ev.seq_index = qi;
            ev.skills = item.skills;
            std::sort(ev.skills.begin(), ev.skills.end());
            ev.start_ms = clock_ms;
            ev.end_ms = clock_ms + std::max<std::int64_t>(1, std::llround(duration * 1000.0));
            ev.duration_s = static_cast<double>(ev.end_ms - ev.start_ms) / 1000.0;
            ev.first_attempt_correct = correct;
            ev.input_type = item.input_type;
            ev.actions_required = item.actions_required;
            ev.gaming_options = item.gaming_options;
            clock_ms = ev.end_ms + 1000;

            const bool learning_blocked = careless && cfg.careless_inhibits_learning;
            for (const auto& sk : item.skills) {
                if (!known[sk]) {
                    const double draw = unit(rng);
                    if (!learning_blocked && draw < skill_params[sk].T) known[sk] = true;
                }
            }

            student.events.push_back(std::move(ev));
            truths.push_back(std::move(t));
        }

        double final_known = 0.0;
        for (const auto& sk : cfg.skills) {
            strue.final_knowledge[sk.id] = known[sk.id];
            final_known += known[sk.id] ? 1.0 : 0.0;
        }
        final_known /= static_cast<double>(cfg.skills.size());
        strue.mean_final_knowledge = final_known;
        strue.realized_careless_rate =
            static_cast<double>(careless_count) / static_cast<double>(cfg.curriculum.size());

        auto noisy_score = [&](double fraction) {
            const double raw = 24.0 * fraction + gauss(rng) * cfg.posttest_noise_sd;
            return std::clamp(std::round(raw), 0.0, 24.0) / 24.0;
        };
        student.pretest = noisy_score(initial_known);
        student.posttest = noisy_score(final_known);
        student.delayed_posttest = noisy_score(final_known);
        student.has_scores = true;

        result.dataset.students[si] = std::move(student);
        result.truth.events[si] = std::move(truths);
        result.truth.students[si] = std::move(strue);
    });

    label_counterfactuals(result.dataset, result.truth);
    return result;
}

// ---------------------------------------------------------------------------
// Ground-truth CSV round trip

inline std::string serialize_ground_truth(const Dataset& d, const GroundTruth& truth) {
    std::string out =
        "student_id,seq_index,careless_behavior,counterfactual_correct,careless_error,"
        "all_skills_known,skills_known\n";
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        for (std::size_t e = 0; e < d.students[s].events.size(); ++e) {
            const EventTruth& t = truth.events[s][e];
            out += csv_escape(d.students[s].student_id);
            out += ',';
            out += std::to_string(d.students[s].events[e].seq_index);
            out += ',';
            out += t.careless_behavior ? '1' : '0';
            out += ',';
            out += t.counterfactual_correct ? '1' : '0';
            out += ',';
            out += t.careless_error ? '1' : '0';
            out += ',';
            out += t.all_skills_known ? '1' : '0';
            out += ',';
            std::string flags;
            for (std::size_t i = 0; i < t.skills_known.size(); ++i) {
                if (i) flags += ';';
                flags += t.skills_known[i] ? '1' : '0';
            }
            out += flags;
            out += '\n';
        }
    }
    return out;
}

inline std::string serialize_student_truth(const Dataset& d, const GroundTruth& truth) {
    std::string out =
        "student_id,drawn_careless_rate,realized_careless_rate,mean_final_knowledge,"
        "final_knowledge\n";
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        const StudentTruth& t = truth.students[s];
        out += csv_escape(d.students[s].student_id);
        out += ',';
        out += format_double(t.drawn_careless_rate);
        out += ',';
        out += format_double(t.realized_careless_rate);
        out += ',';
        out += format_double(t.mean_final_knowledge);
        out += ',';
        std::string flags;
        for (const auto& [skill, k] : t.final_knowledge) {
            if (!flags.empty()) flags += ';';
            flags += skill + "=" + (k ? "1" : "0");
        }
        out += csv_escape(flags);
        out += '\n';
    }
    return out;
}

inline GroundTruth parse_ground_truth(const Dataset& d, std::string_view event_csv,
                                      std::string_view student_csv) {
    GroundTruth truth;
    truth.events.resize(d.students.size());
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        truth.events[s].resize(d.students[s].events.size());
    }
    truth.students.resize(d.students.size());

    std::map<std::string, std::size_t> by_id;
    for (std::size_t s = 0; s < d.students.size(); ++s) by_id[d.students[s].student_id] = s;

    const CsvTable ev = parse_csv(event_csv);
    const std::size_t c_sid = ev.column("student_id");
    const std::size_t c_seq = ev.column("seq_index");
    const std::size_t c_cb = ev.column("careless_behavior");
    const std::size_t c_cf = ev.column("counterfactual_correct");
    const std::size_t c_ce = ev.column("careless_error");
    const std::size_t c_ak = ev.column("all_skills_known");
    const std::size_t c_sk = ev.column("skills_known");
    for (const auto& need : {c_sid, c_seq, c_cb, c_cf, c_ce, c_ak, c_sk}) {
        if (need == CsvTable::npos) throw SchemaError("ground_truth.csv missing a column");
    }
    for (std::size_t r = 0; r < ev.rows.size(); ++r) {
        const auto& row = ev.rows[r];
        const auto it = by_id.find(row[c_sid]);
        if (it == by_id.end()) throw SchemaError("ground truth references unknown student");
        const std::size_t seq = static_cast<std::size_t>(
            detail::parse_int(row[c_seq], r + 2, "seq_index"));
        if (seq >= truth.events[it->second].size()) {
            throw SchemaError("ground truth seq_index out of range");
        }
        EventTruth& t = truth.events[it->second][seq];
        t.careless_behavior = row[c_cb] == "1";
        t.counterfactual_correct = row[c_cf] == "1";
        t.careless_error = row[c_ce] == "1";
        t.all_skills_known = row[c_ak] == "1";
        t.skills_known.clear();
        for (char c : row[c_sk]) {
            if (c == '0') t.skills_known.push_back(0);
            if (c == '1') t.skills_known.push_back(1);
        }
    }

    const CsvTable st = parse_csv(student_csv);
    const std::size_t s_sid = st.column("student_id");
    const std::size_t s_dr = st.column("drawn_careless_rate");
    const std::size_t s_rr = st.column("realized_careless_rate");
    const std::size_t s_mk = st.column("mean_final_knowledge");
    const std::size_t s_fk = st.column("final_knowledge");
    for (const auto& need : {s_sid, s_dr, s_rr, s_mk, s_fk}) {
        if (need == CsvTable::npos) throw SchemaError("ground_truth_students.csv missing a column");
    }
    for (std::size_t r = 0; r < st.rows.size(); ++r) {
        const auto& row = st.rows[r];
        const auto it = by_id.find(row[s_sid]);
        if (it == by_id.end()) throw SchemaError("student truth references unknown student");
        StudentTruth& t = truth.students[it->second];
        t.drawn_careless_rate = detail::parse_real(row[s_dr], r + 2, "drawn_careless_rate");
        t.realized_careless_rate = detail::parse_real(row[s_rr], r + 2, "realized_careless_rate");
        t.mean_final_knowledge = detail::parse_real(row[s_mk], r + 2, "mean_final_knowledge");
        t.final_knowledge.clear();
        std::string cur;
        auto flush = [&] {
            if (cur.empty()) return;
            const auto eq = cur.find('=');
            if (eq != std::string::npos) {
                t.final_knowledge[cur.substr(0, eq)] = cur.substr(eq + 1) == "1";
            }
            cur.clear();
        };
        for (char c : row[s_fk]) {
            if (c == ';') {
                flush();
            } else {
                cur += c;
            }
        }
        flush();
    }
    return truth;
}

// ---------------------------------------------------------------------------
// Shipped configurations

// Single-skill curriculum in the regime of the study this toolkit models:
// 10 skills practiced in interleaved order, nine opportunities each.
inline SimConfig default_sim_config() {
    SimConfig cfg;
    cfg.n_students = 200;
    cfg.seed = 7;
    const std::size_t n_skills = 10;
    const std::size_t rounds = 9;
    for (std::size_t i = 0; i < n_skills; ++i) {
        SkillSpec sk;
        sk.id = "skill" + std::to_string(i);
        sk.true_params.L0 = 0.25 + 0.02 * static_cast<double>(i % 5);
        sk.true_params.T = 0.10 + 0.01 * static_cast<double>(i % 4);
        sk.true_params.G = 0.17 + 0.015 * static_cast<double>(i % 3);
        sk.true_params.S = 0.06 + 0.01 * static_cast<double>(i % 3);
        cfg.skills.push_back(sk);
    }
    const InputType inputs[3] = {InputType::slider, InputType::radio, InputType::text};
    std::size_t q = 0;
    for (std::size_t r = 0; r < rounds; ++r) {
        for (std::size_t i = 0; i < n_skills; ++i, ++q) {
            ItemTemplate item;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "q%03zu", q);
            item.question_id = buf;
            item.skills = {cfg.skills[i].id};
            item.input_type = inputs[q % 3];
            item.actions_required = (q % 2 == 0) ? ActionsRequired::one : ActionsRequired::multiple;
            item.gaming_options = (q % 2 == 0) ? GamingOptions::multiple : GamingOptions::limited;
            item.duration_log_mean = std::log(15.0 + 2.0 * static_cast<double>(q % 7));
            item.duration_log_sd = 0.55;
            cfg.curriculum.push_back(item);
        }
    }
    return cfg;
}

// Curriculum with overlapping multi-skill items (the case the contextual slip
// model cannot score), plus some single-skill practice.
inline SimConfig multiskill_sim_config() {
    SimConfig cfg = default_sim_config();
    cfg.skills.resize(6);
    cfg.curriculum.clear();
    const std::vector<std::vector<std::size_t>> patterns = {
        {0}, {1}, {2}, {0, 1, 2}, {0, 2}, {0, 3}, {1, 2, 3}, {3}, {4}, {5}, {4, 5}, {2, 4},
    };
    const InputType inputs[3] = {InputType::slider, InputType::radio, InputType::text};
    std::size_t q = 0;
    for (std::size_t r = 0; r < 6; ++r) {
        for (const auto& pat : patterns) {
            ItemTemplate item;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "m%03zu", q);
            item.question_id = buf;
            for (std::size_t idx : pat) item.skills.push_back(cfg.skills[idx].id);
            item.input_type = inputs[q % 3];
            item.actions_required = (q % 2 == 0) ? ActionsRequired::one : ActionsRequired::multiple;
            item.gaming_options = (q % 3 == 0) ? GamingOptions::multiple : GamingOptions::limited;
            item.duration_log_mean = std::log(14.0 + 2.0 * static_cast<double>(q % 5));
            item.duration_log_sd = 0.55;
            cfg.curriculum.push_back(item);
            ++q;
        }
    }
    return cfg;
}

}  // namespace careless
