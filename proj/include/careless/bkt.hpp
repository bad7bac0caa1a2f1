#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "careless/errors.hpp"
#include "careless/event_log.hpp"
#include "careless/parallel.hpp"

namespace careless {

// Two-state BKT observation/dynamics parameters, all probabilities.
struct BktParams {
    double L0 = 0.0;  // initial knowledge
    double T = 0.0;   // learn transition per opportunity
    double G = 0.0;   // guess
    double S = 0.0;   // slip

    friend bool operator==(const BktParams&, const BktParams&) = default;
};

enum class CarelessModel { bkt_contextual, ml_contextual, bkfc };

inline const char* to_string(CarelessModel m) {
    switch (m) {
        case CarelessModel::bkt_contextual: return "bkt_contextual";
        case CarelessModel::ml_contextual: return "ml_contextual";
        case CarelessModel::bkfc: return "bkfc";
    }
    return "?";
}

// Per-incorrect-event carelessness probability with model provenance.
struct SlipEstimate {
    EventRef ref;
    double probability = 0.0;
    CarelessModel model = CarelessModel::bkt_contextual;
};

inline double bkt_predict_correct(double pL, const BktParams& p) {
    return pL * (1.0 - p.S) + (1.0 - pL) * p.G;
}

struct BktUpdate {
    double posterior_obs = 0.0;  // P(L | observation), before transition
    double next_prior = 0.0;     // after applying the learning transition
};

inline BktUpdate bkt_update(double pL, bool observed_correct, const BktParams& p) {
    double num, den;
    if (observed_correct) {
        num = pL * (1.0 - p.S);
        den = num + (1.0 - pL) * p.G;
    } else {
        num = pL * p.S;
        den = num + (1.0 - pL) * (1.0 - p.G);
    }
    if (den == 0.0) {
        throw DegenerateUpdate("zero-probability observation under current parameters");
    }
    BktUpdate u;
    u.posterior_obs = num / den;
    u.next_prior = u.posterior_obs + (1.0 - u.posterior_obs) * p.T;
    return u;
}

// ---------------------------------------------------------------------------
// Grid-search fitting

struct GridRange {
    double lo = 0.0;
    double hi = 1.0;
};

// Degeneracy bounds default to G <= 0.5, S <= 0.5.
struct GridSpec {
    GridRange l0{0.0, 1.0};
    GridRange t{0.0, 1.0};
    GridRange g{0.0, 0.5};
    GridRange s{0.0, 0.5};
    double coarse_step = 0.05;
    double refine_step = 0.01;
};

struct BktFit {
    BktParams params;
    double sse = 0.0;
    std::size_t n_obs = 0;
};

namespace detail {

inline double snap_prob(double v) {
    // keep grid values exact at two decimals regardless of accumulation order
    return std::round(v * 1e9) / 1e9;
}

inline std::vector<double> grid_values(const GridRange& r, double step) {
    std::vector<double> vals;
    if (r.hi < r.lo) return vals;
    const int n = static_cast<int>(std::floor((r.hi - r.lo) / step + 1e-9));
    vals.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) vals.push_back(snap_prob(r.lo + k * step));
    if (vals.empty() || vals.back() < snap_prob(r.hi) - 1e-12) vals.push_back(snap_prob(r.hi));
    return vals;
}

// Values centered on `center` at `step` spacing covering +-radius, clipped to
// the range. center itself is always on this grid.
inline std::vector<double> refine_values(const GridRange& r, double center, double radius,
                                         double step) {
    std::vector<double> vals;
    const int span = static_cast<int>(std::ceil(radius / step - 1e-9));
    for (int j = -span; j <= span; ++j) {
        const double v = snap_prob(center + j * step);
        if (v >= r.lo - 1e-12 && v <= r.hi + 1e-12) vals.push_back(std::clamp(v, r.lo, r.hi));
    }
    return vals;
}

// SSE of predicted correctness over the observation sequences; infinity marks
// a cell rejected by a degenerate Bayes update.
inline double bkt_grid_sse(const std::vector<std::vector<std::uint8_t>>& sequences,
                           const BktParams& p) {
    double sse = 0.0;
    for (const auto& seq : sequences) {
        double pL = p.L0;
        for (const std::uint8_t y : seq) {
            const double pred = bkt_predict_correct(pL, p);
            const double diff = pred - static_cast<double>(y);
            sse += diff * diff;
            double num, den;
            if (y) {
                num = pL * (1.0 - p.S);
                den = num + (1.0 - pL) * p.G;
            } else {
                num = pL * p.S;
                den = num + (1.0 - pL) * (1.0 - p.G);
            }
            if (den == 0.0) return std::numeric_limits<double>::infinity();
            const double post = num / den;
            pL = post + (1.0 - post) * p.T;
        }
    }
    return sse;
}

inline std::vector<std::vector<std::uint8_t>> skill_sequences(const Dataset& d,
                                                              const SkillId& skill) {
    std::vector<std::vector<std::uint8_t>> sequences;
    for (const auto& student : d.students) {
        std::vector<std::uint8_t> seq;
        for (const auto& ev : student.events) {
            if (!ev.single_skill()) throw MultiSkillUnsupported(ev.student_id, ev.seq_index);
            if (ev.skills.front() == skill) seq.push_back(ev.first_attempt_correct ? 1 : 0);
        }
        if (!seq.empty()) sequences.push_back(std::move(seq));
    }
    return sequences;
}

struct GridSearchResult {
    BktParams best;
    double sse = std::numeric_limits<double>::infinity();
};

// Cells are enumerated in lexicographic (L0, T, G, S) order and compared with
// strict <, so ties resolve to the lexicographically smallest tuple for any
// thread count.
inline GridSearchResult grid_search(const std::vector<std::vector<std::uint8_t>>& sequences,
                                    const std::vector<double>& l0s, const std::vector<double>& ts,
                                    const std::vector<double>& gs, const std::vector<double>& ss,
                                    unsigned threads) {
    const std::size_t n_cells = l0s.size() * ts.size() * gs.size() * ss.size();
    std::vector<double> sse(n_cells);
    const std::size_t stride_g = ss.size();
    const std::size_t stride_t = gs.size() * stride_g;
    const std::size_t stride_l0 = ts.size() * stride_t;
    parallel_for(n_cells, threads, [&](std::size_t c) {
        const std::size_t i0 = c / stride_l0;
        const std::size_t it = (c / stride_t) % ts.size();
        const std::size_t ig = (c / stride_g) % gs.size();
        const std::size_t is = c % ss.size();
        sse[c] = bkt_grid_sse(sequences, {l0s[i0], ts[it], gs[ig], ss[is]});
    });
    GridSearchResult r;
    for (std::size_t c = 0; c < n_cells; ++c) {
        if (sse[c] < r.sse) {
            r.sse = sse[c];
            const std::size_t i0 = c / stride_l0;
            const std::size_t it = (c / stride_t) % ts.size();
            const std::size_t ig = (c / stride_g) % gs.size();
            const std::size_t is = c % ss.size();
            r.best = {l0s[i0], ts[it], gs[ig], ss[is]};
        }
    }
    return r;
}

}  // namespace detail

// Brute-force two-stage grid search minimizing SSE of predicted correctness.
// Coarse pass over the full grid, then a refinement pass around the coarse
// optimum at refine_step spacing.
inline BktFit fit_bkt_grid(const Dataset& d, const SkillId& skill, const GridSpec& grid = {},
                           unsigned threads = 1) {
    const auto sequences = detail::skill_sequences(d, skill);
    std::size_t n_obs = 0;
    for (const auto& seq : sequences) n_obs += seq.size();
    if (n_obs == 0) throw NoData("no opportunities for skill: " + skill);

    const auto coarse = detail::grid_search(
        sequences, detail::grid_values(grid.l0, grid.coarse_step),
        detail::grid_values(grid.t, grid.coarse_step),
        detail::grid_values(grid.g, grid.coarse_step),
        detail::grid_values(grid.s, grid.coarse_step), threads);

    detail::GridSearchResult result = coarse;
    if (grid.refine_step < grid.coarse_step) {
        const auto refined = detail::grid_search(
            sequences,
            detail::refine_values(grid.l0, coarse.best.L0, grid.coarse_step, grid.refine_step),
            detail::refine_values(grid.t, coarse.best.T, grid.coarse_step, grid.refine_step),
            detail::refine_values(grid.g, coarse.best.G, grid.coarse_step, grid.refine_step),
            detail::refine_values(grid.s, coarse.best.S, grid.coarse_step, grid.refine_step),
            threads);
        if (refined.sse < result.sse) result = refined;
    }
    if (!std::isfinite(result.sse)) {
        throw NoData("every grid cell was rejected for skill: " + skill);
    }
    return {result.best, result.sse, n_obs};
}

// ---------------------------------------------------------------------------
// Knowledge tracing

struct TraceStep {
    std::size_t event_index = 0;  // index into the student's event list
    double prior = 0.0;           // p(L) entering this opportunity
    double posterior_obs = 0.0;   // after the Bayes update alone
    double posterior = 0.0;       // after update and learning transition
};

struct KnowledgeTrace {
    // per student: skill -> ordered opportunities on that skill
    std::vector<std::map<SkillId, std::vector<TraceStep>>> per_student;
};

inline KnowledgeTrace trace_knowledge(const Dataset& d,
                                      const std::map<SkillId, BktParams>& params) {
    KnowledgeTrace trace;
    trace.per_student.resize(d.students.size());
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        const auto& events = d.students[s].events;
        std::map<SkillId, double> state;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const auto& ev = events[e];
            if (!ev.single_skill()) throw MultiSkillUnsupported(ev.student_id, ev.seq_index);
            const SkillId& skill = ev.skills.front();
            const auto pit = params.find(skill);
            if (pit == params.end()) throw MissingParams(skill);
            const BktParams& p = pit->second;
            auto [sit, inserted] = state.try_emplace(skill, p.L0);
            TraceStep step;
            step.event_index = e;
            step.prior = sit->second;
            const BktUpdate u = bkt_update(step.prior, ev.first_attempt_correct, p);
            step.posterior_obs = u.posterior_obs;
            step.posterior = u.next_prior;
            sit->second = u.next_prior;
            trace.per_student[s][skill].push_back(step);
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Contextual slip (carelessness from two-step lookahead)

struct ContextualSlipOptions {
    // When true, the prior is first conditioned on the current answer being
    // incorrect before applying the lookahead evidence. Default follows the
    // printed equation: the prior covers actions 1..N-1 only.
    bool condition_on_incorrect = false;
};

// P(L_N | A_{N+1}, A_{N+2}) for one incorrect answer, with prior p entering
// step N. Knowledge is absorbing; the learning transition applies after each
// opportunity. A known state answers correctly with 1-S, unknown with G.
inline double contextual_slip_probability(double prior, bool next1_correct, bool next2_correct,
                                          const BktParams& p) {
    const auto emit_known = [&](bool correct) { return correct ? 1.0 - p.S : p.S; };
    const auto emit_unknown = [&](bool correct) { return correct ? p.G : 1.0 - p.G; };

    const double like_known = emit_known(next1_correct) * emit_known(next2_correct);
    const double like_unknown =
        p.T * emit_known(next1_correct) * emit_known(next2_correct) +
        (1.0 - p.T) * emit_unknown(next1_correct) *
            (p.T * emit_known(next2_correct) + (1.0 - p.T) * emit_unknown(next2_correct));

    const double num = prior * like_known;
    const double den = num + (1.0 - prior) * like_unknown;
    if (den == 0.0) return prior;  // lookahead carries no information
    return num / den;
}

inline std::vector<SlipEstimate> contextual_slip(const Dataset& d, const KnowledgeTrace& traces,
                                                 const std::map<SkillId, BktParams>& params,
                                                 const ContextualSlipOptions& opts = {}) {
    const auto estimable = slip_estimable_events(d);
    std::vector<SlipEstimate> out;
    out.reserve(estimable.size());
    for (const EventRef ref : estimable) {
        const auto& ev = event_at(d, ref);
        const SkillId& skill = ev.skills.front();
        const auto pit = params.find(skill);
        if (pit == params.end()) throw MissingParams(skill);
        const BktParams& p = pit->second;

        const auto& steps = traces.per_student[ref.student].at(skill);
        std::size_t idx = steps.size();
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (steps[i].event_index == ref.event) {
                idx = i;
                break;
            }
        }
        if (idx + 2 >= steps.size()) {
            throw InsufficientLookahead("event lacks two same-skill lookahead opportunities");
        }
        const auto& events = d.students[ref.student].events;
        const bool a1 = events[steps[idx + 1].event_index].first_attempt_correct;
        const bool a2 = events[steps[idx + 2].event_index].first_attempt_correct;

        double prior = steps[idx].prior;
        if (opts.condition_on_incorrect) {
            const double num = prior * p.S;
            const double den = num + (1.0 - prior) * (1.0 - p.G);
            if (den > 0.0) prior = num / den;
        }
        out.push_back({ref, contextual_slip_probability(prior, a1, a2, p),
                       CarelessModel::bkt_contextual});
    }
    return out;
}

}  // namespace careless
