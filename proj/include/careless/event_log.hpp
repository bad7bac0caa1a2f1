#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "careless/csv.hpp"
#include "careless/errors.hpp"

namespace careless {

using SkillId = std::string;

enum class InputType { slider, radio, text };
enum class ActionsRequired { one, multiple };
enum class GamingOptions { multiple, limited };

inline const char* to_string(InputType v) {
    switch (v) {
        case InputType::slider: return "slider";
        case InputType::radio: return "radio";
        case InputType::text: return "text";
    }
    return "?";
}
inline const char* to_string(ActionsRequired v) {
    return v == ActionsRequired::one ? "one" : "multiple";
}
inline const char* to_string(GamingOptions v) {
    return v == GamingOptions::multiple ? "multiple" : "limited";
}

// One first-attempt response to one question step.
struct QuestionEvent {
    std::string student_id;
    std::string question_id;
    std::size_t seq_index = 0;          // 0-based per-student ordinal
    std::vector<SkillId> skills;        // non-empty, sorted, unique
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    double duration_s = 0.0;            // derived: (end_ms - start_ms) / 1000
    bool first_attempt_correct = false;
    InputType input_type = InputType::slider;
    ActionsRequired actions_required = ActionsRequired::one;
    GamingOptions gaming_options = GamingOptions::multiple;

    bool single_skill() const { return skills.size() == 1; }

    friend bool operator==(const QuestionEvent&, const QuestionEvent&) = default;
};

// Test scores are stored as fractions in [0, 1]; the raw maximum lives in
// DatasetMetadata::score_max.
struct StudentRecord {
    std::string student_id;
    std::vector<QuestionEvent> events;
    double pretest = 0.0;
    double posttest = 0.0;
    double delayed_posttest = 0.0;
    bool has_scores = false;
    std::optional<double> gaming_measure;
    std::optional<double> confrustion_measure;

    friend bool operator==(const StudentRecord&, const StudentRecord&) = default;
};

struct DatasetMetadata {
    std::string source;
    std::optional<std::uint64_t> generation_seed;
    double score_max = 24.0;

    friend bool operator==(const DatasetMetadata&, const DatasetMetadata&) = default;
};

struct Dataset {
    std::vector<StudentRecord> students;
    std::set<SkillId> skills;
    DatasetMetadata metadata;

    std::size_t n_events() const {
        std::size_t n = 0;
        for (const auto& s : students) n += s.events.size();
        return n;
    }

    bool all_single_skill() const {
        for (const auto& s : students)
            for (const auto& e : s.events)
                if (!e.single_skill()) return false;
        return true;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Stable handle to one event inside a Dataset.
struct EventRef {
    std::size_t student = 0;
    std::size_t event = 0;

    friend auto operator<=>(const EventRef&, const EventRef&) = default;
};

inline const QuestionEvent& event_at(const Dataset& d, EventRef ref) {
    return d.students[ref.student].events[ref.event];
}

// Enumerates events in dataset order (students in order, events by seq_index).
inline std::vector<EventRef> all_events(const Dataset& d) {
    std::vector<EventRef> refs;
    refs.reserve(d.n_events());
    for (std::size_t s = 0; s < d.students.size(); ++s)
        for (std::size_t e = 0; e < d.students[s].events.size(); ++e)
            refs.push_back({s, e});
    return refs;
}

// ---------------------------------------------------------------------------
// Parsing

// Maps the canonical column names to the actual header names in the file.
// Canonical names: student_id, question_id, start_ms, end_ms, skills,
// correct, input_type, actions_required, gaming_options.
using ColumnSchema = std::map<std::string, std::string>;

inline ColumnSchema default_log_schema() {
    ColumnSchema s;
    for (const char* name : {"student_id", "question_id", "start_ms", "end_ms", "skills",
                             "correct", "input_type", "actions_required", "gaming_options"}) {
        s[name] = name;
    }
    return s;
}

namespace detail {

inline std::int64_t parse_int(const std::string& s, std::size_t row_no, const char* what) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw MalformedRow(row_no, std::string("cannot parse ") + what + " from '" + s + "'");
    }
}

inline double parse_real(const std::string& s, std::size_t row_no, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw MalformedRow(row_no, std::string("cannot parse ") + what + " from '" + s + "'");
    }
}

inline InputType parse_input_type(const std::string& s, std::size_t row_no) {
    if (s == "slider") return InputType::slider;
    if (s == "radio") return InputType::radio;
    if (s == "text") return InputType::text;
    throw MalformedRow(row_no, "unknown input_type '" + s + "'");
}

inline ActionsRequired parse_actions(const std::string& s, std::size_t row_no) {
    if (s == "one") return ActionsRequired::one;
    if (s == "multiple") return ActionsRequired::multiple;
    throw MalformedRow(row_no, "unknown actions_required '" + s + "'");
}

inline GamingOptions parse_gaming(const std::string& s, std::size_t row_no) {
    if (s == "multiple") return GamingOptions::multiple;
    if (s == "limited") return GamingOptions::limited;
    throw MalformedRow(row_no, "unknown gaming_options '" + s + "'");
}

inline std::vector<SkillId> parse_skills(const std::string& s, std::size_t row_no) {
    std::vector<SkillId> skills;
    std::string cur;
    for (char c : s) {
        if (c == ';') {
            if (!cur.empty()) skills.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) skills.push_back(cur);
    std::sort(skills.begin(), skills.end());
    skills.erase(std::unique(skills.begin(), skills.end()), skills.end());
    if (skills.empty()) throw MalformedRow(row_no, "event has no skills");
    return skills;
}

}  // namespace detail

// Parses an interaction-log CSV into a validated Dataset. Rows are grouped by
// student, ordered by start_ms (ties keep file order), and seq_index is
// assigned 0..n-1 per student. Duplicate timestamps within a student are
// reported through `warnings`, not as errors.
inline Dataset parse_log(std::string_view csv_text, const ColumnSchema& schema,
                         std::vector<std::string>* warnings = nullptr) {
    const CsvTable table = parse_csv(csv_text);

    const ColumnSchema defaults = default_log_schema();
    std::map<std::string, std::size_t> col;
    for (const auto& [canonical, unused] : defaults) {
        const auto it = schema.find(canonical);
        if (it == schema.end()) throw MissingColumn(canonical);
        const std::size_t idx = table.column(it->second);
        if (idx == CsvTable::npos) throw MissingColumn(it->second);
        col[canonical] = idx;
    }
    if (table.rows.empty()) throw EmptyDataset();

    Dataset d;
    std::map<std::string, std::size_t> student_index;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_no = r + 2;  // 1-based, after header
        std::size_t max_col = 0;
        for (const auto& [name, idx] : col) max_col = std::max(max_col, idx);
        if (row.size() <= max_col) throw MalformedRow(row_no, "too few fields");

        QuestionEvent ev;
        ev.student_id = row[col["student_id"]];
        ev.question_id = row[col["question_id"]];
        ev.start_ms = detail::parse_int(row[col["start_ms"]], row_no, "start_ms");
        ev.end_ms = detail::parse_int(row[col["end_ms"]], row_no, "end_ms");
        if (ev.end_ms < ev.start_ms) throw MalformedRow(row_no, "end_ms before start_ms");
        ev.duration_s = static_cast<double>(ev.end_ms - ev.start_ms) / 1000.0;
        ev.skills = detail::parse_skills(row[col["skills"]], row_no);
        const std::string& correct = row[col["correct"]];
        if (correct == "1") {
            ev.first_attempt_correct = true;
        } else if (correct == "0") {
            ev.first_attempt_correct = false;
        } else {
            throw MalformedRow(row_no, "correct must be 0 or 1, got '" + correct + "'");
        }
        ev.input_type = detail::parse_input_type(row[col["input_type"]], row_no);
        ev.actions_required = detail::parse_actions(row[col["actions_required"]], row_no);
        ev.gaming_options = detail::parse_gaming(row[col["gaming_options"]], row_no);

        auto [it, inserted] = student_index.try_emplace(ev.student_id, d.students.size());
        if (inserted) {
            StudentRecord rec;
            rec.student_id = ev.student_id;
            d.students.push_back(std::move(rec));
        }
        for (const auto& sk : ev.skills) d.skills.insert(sk);
        d.students[it->second].events.push_back(std::move(ev));
    }

    for (auto& student : d.students) {
        std::stable_sort(student.events.begin(), student.events.end(),
                         [](const QuestionEvent& a, const QuestionEvent& b) {
                             return a.start_ms < b.start_ms;
                         });
        for (std::size_t i = 0; i < student.events.size(); ++i) {
            student.events[i].seq_index = i;
            if (i > 0 && student.events[i].start_ms == student.events[i - 1].start_ms &&
                warnings != nullptr) {
                warnings->push_back("OrderingViolation: student " + student.student_id +
                                    " has duplicate start_ms " +
                                    std::to_string(student.events[i].start_ms) +
                                    "; file order preserved");
            }
        }
    }
    return d;
}

inline Dataset parse_log(std::string_view csv_text,
                         std::vector<std::string>* warnings = nullptr) {
    return parse_log(csv_text, default_log_schema(), warnings);
}

// Serializes a Dataset back to the documented CSV schema. parse_log of the
// output reproduces the Dataset exactly (scores excluded; see scores file).
inline std::string serialize_log(const Dataset& d) {
    std::string out =
        "student_id,question_id,start_ms,end_ms,skills,correct,input_type,"
        "actions_required,gaming_options\n";
    for (const auto& student : d.students) {
        for (const auto& ev : student.events) {
            std::string skills;
            for (std::size_t i = 0; i < ev.skills.size(); ++i) {
                if (i) skills += ';';
                skills += ev.skills[i];
            }
            out += csv_escape(ev.student_id);
            out += ',';
            out += csv_escape(ev.question_id);
            out += ',';
            out += std::to_string(ev.start_ms);
            out += ',';
            out += std::to_string(ev.end_ms);
            out += ',';
            out += csv_escape(skills);
            out += ',';
            out += ev.first_attempt_correct ? '1' : '0';
            out += ',';
            out += to_string(ev.input_type);
            out += ',';
            out += to_string(ev.actions_required);
            out += ',';
            out += to_string(ev.gaming_options);
            out += '\n';
        }
    }
    return out;
}

// Scores file: student_id, pretest, posttest, delayed_posttest[, gaming,
// confrustion]. Raw values (counts or percentages) are normalized by
// score_max; the raw maximum is kept in Dataset metadata.
inline void load_scores(Dataset& d, std::string_view csv_text, double score_max = 24.0) {
    const CsvTable table = parse_csv(csv_text);
    const std::size_t c_sid = table.column("student_id");
    const std::size_t c_pre = table.column("pretest");
    const std::size_t c_post = table.column("posttest");
    const std::size_t c_delayed = table.column("delayed_posttest");
    if (c_sid == CsvTable::npos) throw MissingColumn("student_id");
    if (c_pre == CsvTable::npos) throw MissingColumn("pretest");
    if (c_post == CsvTable::npos) throw MissingColumn("posttest");
    if (c_delayed == CsvTable::npos) throw MissingColumn("delayed_posttest");
    const std::size_t c_gaming = table.column("gaming");
    const std::size_t c_confr = table.column("confrustion");

    std::map<std::string, StudentRecord*> by_id;
    for (auto& s : d.students) by_id[s.student_id] = &s;

    d.metadata.score_max = score_max;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_no = r + 2;
        if (row.size() < 4) throw MalformedRow(row_no, "too few fields");
        const auto it = by_id.find(row[c_sid]);
        if (it == by_id.end()) continue;  // scores for unknown students are ignored
        StudentRecord& rec = *it->second;
        auto norm = [&](const std::string& s, const char* what) {
            const double v = detail::parse_real(s, row_no, what);
            if (v < 0.0 || v > score_max) {
                throw MalformedRow(row_no, std::string(what) + " outside [0, " +
                                               format_double(score_max) + "]");
            }
            return v / score_max;
        };
        rec.pretest = norm(row[c_pre], "pretest");
        rec.posttest = norm(row[c_post], "posttest");
        rec.delayed_posttest = norm(row[c_delayed], "delayed_posttest");
        rec.has_scores = true;
        if (c_gaming != CsvTable::npos && row.size() > c_gaming && !row[c_gaming].empty()) {
            rec.gaming_measure = detail::parse_real(row[c_gaming], row_no, "gaming");
        }
        if (c_confr != CsvTable::npos && row.size() > c_confr && !row[c_confr].empty()) {
            rec.confrustion_measure = detail::parse_real(row[c_confr], row_no, "confrustion");
        }
    }
}

inline std::string serialize_scores(const Dataset& d) {
    bool any_gaming = false;
    bool any_confr = false;
    for (const auto& s : d.students) {
        if (s.gaming_measure) any_gaming = true;
        if (s.confrustion_measure) any_confr = true;
    }
    std::string out = "student_id,pretest,posttest,delayed_posttest";
    if (any_gaming) out += ",gaming";
    if (any_confr) out += ",confrustion";
    out += '\n';
    const double max = d.metadata.score_max;
    for (const auto& s : d.students) {
        if (!s.has_scores) continue;
        out += csv_escape(s.student_id);
        out += ',';
        out += format_double(s.pretest * max);
        out += ',';
        out += format_double(s.posttest * max);
        out += ',';
        out += format_double(s.delayed_posttest * max);
        if (any_gaming) {
            out += ',';
            if (s.gaming_measure) out += format_double(*s.gaming_measure);
        }
        if (any_confr) {
            out += ',';
            if (s.confrustion_measure) out += format_double(*s.confrustion_measure);
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partitions

struct CorrectnessSplit {
    std::vector<EventRef> correct;
    std::vector<EventRef> incorrect;
};

inline CorrectnessSplit split_correct_incorrect(const Dataset& d) {
    CorrectnessSplit split;
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        const auto& events = d.students[s].events;
        for (std::size_t e = 0; e < events.size(); ++e) {
            (events[e].first_attempt_correct ? split.correct : split.incorrect)
                .push_back({s, e});
        }
    }
    return split;
}

// Incorrect events that the contextual slip model can score: single-skill
// events with at least two later same-skill opportunities for that student.
// The last two opportunities of each (student, skill) are excluded.
inline std::vector<EventRef> slip_estimable_events(const Dataset& d) {
    std::vector<EventRef> out;
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        const auto& events = d.students[s].events;
        std::map<SkillId, std::size_t> remaining;
        for (const auto& ev : events) {
            if (!ev.single_skill()) throw MultiSkillUnsupported(ev.student_id, ev.seq_index);
            ++remaining[ev.skills.front()];
        }
        for (std::size_t e = 0; e < events.size(); ++e) {
            const SkillId& skill = events[e].skills.front();
            --remaining[skill];  // opportunities strictly after this one
            if (!events[e].first_attempt_correct && remaining[skill] >= 2) {
                out.push_back({s, e});
            }
        }
    }
    return out;
}

}  // namespace careless
