#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "careless/csv.hpp"
#include "careless/event_log.hpp"
#include "careless/math.hpp"
#include "careless/rng.hpp"

namespace careless {

// The behavioral features distilled per event. Fourteen numeric features plus
// three categorical ones; encode() expands the categoricals into four dummy
// columns (slider / multiple-actions / limited-gaming are the baselines) for
// an encoded width of 18.
struct FeatureVector {
    double duration = 0.0;          // seconds on this question
    double z_problem = 0.0;         // duration z-score vs all students, same question
    double z_skill = 0.0;           // duration z-score vs all students, same skill
    double student_diff = 0.0;      // duration minus the student's running mean
    double total_time = 0.0;        // seconds over all questions so far (inclusive)
    double total_time_skill = 0.0;  // seconds on the same skill so far (inclusive)
    double dur_prev = 0.0;          // previous question's duration
    double dur_prev2 = 0.0;         // sum of the previous two questions' durations
    double sd_last3_skill = 0.0;    // sample SD of the last 3 same-skill durations
    double n_attempted = 0.0;       // questions attempted so far (inclusive)
    double n_attempted_skill = 0.0; // same-skill questions attempted so far (inclusive)
    double prev_correct = 0.0;      // previous question correct (0/1)
    double n_correct_prev2 = 0.0;   // correct count over the previous two (0/1/2)
    double pct_errors_skill = 0.0;  // fraction of previous same-skill questions incorrect
    InputType input_type = InputType::slider;
    ActionsRequired actions_required = ActionsRequired::one;
    GamingOptions gaming_options = GamingOptions::multiple;
};

inline constexpr std::size_t kEncodedWidth = 18;

inline std::array<double, kEncodedWidth> encode(const FeatureVector& fv) {
    return {
        fv.duration,
        fv.z_problem,
        fv.z_skill,
        fv.student_diff,
        fv.total_time,
        fv.total_time_skill,
        fv.dur_prev,
        fv.dur_prev2,
        fv.sd_last3_skill,
        fv.n_attempted,
        fv.n_attempted_skill,
        fv.prev_correct,
        fv.n_correct_prev2,
        fv.pct_errors_skill,
        fv.input_type == InputType::radio ? 1.0 : 0.0,
        fv.input_type == InputType::text ? 1.0 : 0.0,
        fv.actions_required == ActionsRequired::one ? 1.0 : 0.0,
        fv.gaming_options == GamingOptions::multiple ? 1.0 : 0.0,
    };
}

inline const std::vector<std::string>& feature_manifest() {
    static const std::vector<std::string> names = {
        "duration",
        "z_problem",
        "z_skill",
        "student_diff",
        "total_time",
        "total_time_skill",
        "dur_prev",
        "dur_prev2",
        "sd_last3_skill",
        "n_attempted",
        "n_attempted_skill",
        "prev_correct",
        "n_correct_prev2",
        "pct_errors_skill",
        "input_type_radio",
        "input_type_text",
        "actions_required_one",
        "gaming_options_multiple",
    };
    return names;
}

inline std::uint64_t feature_manifest_hash() {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& name : feature_manifest()) {
        h = fnv1a64_str(name, h);
        h = fnv1a64("|", 1, h);
    }
    return h;
}

struct FeatureMatrix {
    std::vector<EventRef> refs;  // dataset order
    std::vector<std::array<double, kEncodedWidth>> rows;
    std::uint64_t manifest_hash = 0;
    bool online_z = false;

    // offset of each student's first row; rows follow seq_index order
    std::vector<std::size_t> student_offsets;

    std::size_t row_index(EventRef ref) const { return student_offsets[ref.student] + ref.event; }
    const std::array<double, kEncodedWidth>& row(EventRef ref) const {
        return rows[row_index(ref)];
    }
};

struct FeatureOptions {
    // When true, the duration z-scores use only observations with earlier
    // start times (running statistics) instead of whole-dataset aggregates.
    bool online_z = false;
};

namespace detail {

struct RunningStat {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double sample_sd() const {
        return n >= 2 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
    }
    // 0 when the comparison pool has under two observations or no variance
    double z(double x) const {
        if (n < 2) return 0.0;
        const double sd = sample_sd();
        if (sd <= 0.0) return 0.0;
        return (x - mean) / sd;
    }
};

}  // namespace detail

// Computes the per-event behavioral features. All per-student features are
// causal in seq_index; the duration z-scores compare against the whole
// dataset (the retrospective setting) unless opts.online_z is set. Cold-start
// cases produce the documented defaults, never errors. Multi-skill events
// take the mean of the per-skill statistics over the event's skills.
inline FeatureMatrix extract_features(const Dataset& d, const FeatureOptions& opts = {}) {
    FeatureMatrix fm;
    fm.manifest_hash = feature_manifest_hash();
    fm.online_z = opts.online_z;
    fm.refs = all_events(d);
    fm.rows.resize(fm.refs.size());
    fm.student_offsets.resize(d.students.size(), 0);
    {
        std::size_t off = 0;
        for (std::size_t s = 0; s < d.students.size(); ++s) {
            fm.student_offsets[s] = off;
            off += d.students[s].events.size();
        }
    }

    std::map<std::string, detail::RunningStat> by_question;
    std::map<SkillId, detail::RunningStat> by_skill;

    std::vector<double> z_problem(fm.refs.size(), 0.0);
    std::vector<double> z_skill(fm.refs.size(), 0.0);

    if (opts.online_z) {
        // accumulate in global start-time order; ties resolved by dataset order
        std::vector<std::size_t> order(fm.refs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return event_at(d, fm.refs[a]).start_ms < event_at(d, fm.refs[b]).start_ms;
        });
        for (const std::size_t i : order) {
            const auto& ev = event_at(d, fm.refs[i]);
            auto& qs = by_question[ev.question_id];
            z_problem[i] = qs.z(ev.duration_s);
            qs.add(ev.duration_s);
            double z = 0.0;
            for (const auto& sk : ev.skills) {
                auto& ss = by_skill[sk];
                z += ss.z(ev.duration_s);
                ss.add(ev.duration_s);
            }
            z_skill[i] = z / static_cast<double>(ev.skills.size());
        }
    } else {
        for (const auto& ref : fm.refs) {
            const auto& ev = event_at(d, ref);
            by_question[ev.question_id].add(ev.duration_s);
            for (const auto& sk : ev.skills) by_skill[sk].add(ev.duration_s);
        }
        for (std::size_t i = 0; i < fm.refs.size(); ++i) {
            const auto& ev = event_at(d, fm.refs[i]);
            z_problem[i] = by_question[ev.question_id].z(ev.duration_s);
            double z = 0.0;
            for (const auto& sk : ev.skills) z += by_skill[sk].z(ev.duration_s);
            z_skill[i] = z / static_cast<double>(ev.skills.size());
        }
    }

    struct SkillState {
        double total_time = 0.0;
        std::size_t attempts = 0;
        std::size_t errors = 0;
        std::array<double, 3> last3{};  // ring buffer of recent durations
        std::size_t last3_n = 0;
    };

    for (std::size_t s = 0; s < d.students.size(); ++s) {
        const auto& events = d.students[s].events;
        std::map<SkillId, SkillState> per_skill;
        double total_time = 0.0;
        double sum_duration = 0.0;
        std::size_t attempted = 0;
        double prev_dur = 0.0;
        double prev2_dur = 0.0;
        int prev_correct = -1;   // -1: none
        int prev2_correct = -1;

        for (std::size_t e = 0; e < events.size(); ++e) {
            const auto& ev = events[e];
            const std::size_t row = fm.student_offsets[s] + e;
            FeatureVector fv;
            fv.duration = ev.duration_s;
            fv.z_problem = z_problem[row];
            fv.z_skill = z_skill[row];

            const double mean_incl =
                (sum_duration + ev.duration_s) / static_cast<double>(attempted + 1);
            fv.student_diff = e == 0 ? 0.0 : ev.duration_s - mean_incl;
            fv.total_time = total_time + ev.duration_s;
            fv.n_attempted = static_cast<double>(attempted + 1);
            fv.dur_prev = e >= 1 ? prev_dur : 0.0;
            fv.dur_prev2 = e >= 2 ? prev_dur + prev2_dur : 0.0;
            fv.prev_correct = prev_correct == 1 ? 1.0 : 0.0;
            fv.n_correct_prev2 =
                (prev_correct == 1 ? 1.0 : 0.0) + (prev2_correct == 1 ? 1.0 : 0.0);

            double tts = 0.0;
            double nas = 0.0;
            double sd3 = 0.0;
            double pct_err = 0.0;
            for (const auto& sk : ev.skills) {
                SkillState& st = per_skill[sk];
                tts += st.total_time + ev.duration_s;
                nas += static_cast<double>(st.attempts + 1);
                if (st.attempts > 0) {
                    pct_err += static_cast<double>(st.errors) / static_cast<double>(st.attempts);
                }
                if (st.last3_n >= 2) {  // two prior plus current = three
                    const std::array<double, 3> window = {
                        st.last3[(st.last3_n - 2) % 3], st.last3[(st.last3_n - 1) % 3],
                        ev.duration_s};
                    sd3 += sample_sd(std::span<const double>(window.data(), 3));
                }
            }
            const double k = static_cast<double>(ev.skills.size());
            fv.total_time_skill = tts / k;
            fv.n_attempted_skill = nas / k;
            fv.sd_last3_skill = sd3 / k;
            fv.pct_errors_skill = pct_err / k;

            fv.input_type = ev.input_type;
            fv.actions_required = ev.actions_required;
            fv.gaming_options = ev.gaming_options;
            fm.rows[row] = encode(fv);

            // advance running state
            total_time += ev.duration_s;
            sum_duration += ev.duration_s;
            ++attempted;
            prev2_dur = prev_dur;
            prev_dur = ev.duration_s;
            prev2_correct = prev_correct;
            prev_correct = ev.first_attempt_correct ? 1 : 0;
            for (const auto& sk : ev.skills) {
                SkillState& st = per_skill[sk];
                st.total_time += ev.duration_s;
                ++st.attempts;
                if (!ev.first_attempt_correct) ++st.errors;
                st.last3[st.last3_n % 3] = ev.duration_s;
                ++st.last3_n;
            }
        }
    }
    return fm;
}

// features.csv: key columns plus the encoded predictors in manifest order.
inline std::string serialize_features(const Dataset& d, const FeatureMatrix& fm) {
    std::string out = "student_id,seq_index";
    for (const auto& name : feature_manifest()) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t i = 0; i < fm.refs.size(); ++i) {
        const auto& ev = event_at(d, fm.refs[i]);
        out += csv_escape(ev.student_id);
        out += ',';
        out += std::to_string(ev.seq_index);
        for (double v : fm.rows[i]) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace careless
