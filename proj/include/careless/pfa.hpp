#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "careless/errors.hpp"
#include "careless/event_log.hpp"
#include "careless/linalg.hpp"
#include "careless/math.hpp"

namespace careless {

struct PfaSkillParams {
    double beta = 0.0;   // KC easiness logit
    double gamma = 0.0;  // weight on prior successes
    double rho = 0.0;    // weight on prior failures

    friend bool operator==(const PfaSkillParams&, const PfaSkillParams&) = default;
};

struct PfaParams {
    std::map<SkillId, PfaSkillParams> by_skill;

    friend bool operator==(const PfaParams&, const PfaParams&) = default;
};

// m = sum over the event's KCs of (beta_j + gamma_j * s_j + rho_j * f_j)
inline double pfa_m(const std::vector<SkillId>& skills, const std::vector<double>& s,
                    const std::vector<double>& f, const PfaParams& params) {
    double m = 0.0;
    for (std::size_t i = 0; i < skills.size(); ++i) {
        const auto it = params.by_skill.find(skills[i]);
        if (it == params.by_skill.end()) throw UnknownSkill(skills[i]);
        m += it->second.beta + it->second.gamma * s[i] + it->second.rho * f[i];
    }
    return m;
}

struct PfaEstimate {
    EventRef ref;
    double m = 0.0;
    double p_m = 0.5;
    std::vector<std::uint32_t> s_counts;  // aligned to the event's skill list
    std::vector<std::uint32_t> f_counts;
};

struct OptSpec {
    double tol = 1e-8;       // max-norm gradient tolerance
    int max_iter = 500;
    double param_cap = 25.0; // separation guard
    bool intercept_only = false;  // restricted fit: gamma = rho = 0
};

struct PfaFitResult {
    PfaParams params;
    double log_lik = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool separation_warning = false;
};

namespace detail {

// One event's sparse design row: per tagged skill, its index and the causal
// success/failure counts entering this event.
struct PfaRow {
    std::vector<std::uint32_t> skill;
    std::vector<double> s;
    std::vector<double> f;
    double y = 0.0;
};

struct PfaDesign {
    std::vector<SkillId> skill_order;  // sorted; parameter layout (b,g,r) per skill
    std::map<SkillId, std::uint32_t> skill_index;
    std::vector<PfaRow> rows;          // dataset order
};

inline PfaDesign build_pfa_design(const Dataset& d) {
    PfaDesign design;
    for (const auto& sk : d.skills) {
        design.skill_index[sk] = static_cast<std::uint32_t>(design.skill_order.size());
        design.skill_order.push_back(sk);
    }
    for (const auto& student : d.students) {
        std::map<SkillId, std::pair<std::uint32_t, std::uint32_t>> counts;
        for (const auto& ev : student.events) {
            PfaRow row;
            row.y = ev.first_attempt_correct ? 1.0 : 0.0;
            for (const auto& sk : ev.skills) {
                const auto& c = counts[sk];
                row.skill.push_back(design.skill_index.at(sk));
                row.s.push_back(static_cast<double>(c.first));
                row.f.push_back(static_cast<double>(c.second));
            }
            design.rows.push_back(std::move(row));
            for (const auto& sk : ev.skills) {
                auto& c = counts[sk];
                if (ev.first_attempt_correct) {
                    ++c.first;
                } else {
                    ++c.second;
                }
            }
        }
    }
    return design;
}

inline double pfa_row_m(const PfaRow& row, const std::vector<double>& theta) {
    double m = 0.0;
    for (std::size_t i = 0; i < row.skill.size(); ++i) {
        const std::size_t base = 3 * row.skill[i];
        m += theta[base] + theta[base + 1] * row.s[i] + theta[base + 2] * row.f[i];
    }
    return m;
}

}  // namespace detail

inline std::vector<SkillId> pfa_parameter_order(const Dataset& d) {
    return {d.skills.begin(), d.skills.end()};
}

inline std::vector<double> pfa_param_vector(const PfaParams& params,
                                            const std::vector<SkillId>& order) {
    std::vector<double> theta(3 * order.size(), 0.0);
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto it = params.by_skill.find(order[j]);
        if (it == params.by_skill.end()) throw UnknownSkill(order[j]);
        theta[3 * j] = it->second.beta;
        theta[3 * j + 1] = it->second.gamma;
        theta[3 * j + 2] = it->second.rho;
    }
    return theta;
}

inline PfaParams pfa_params_from_vector(const std::vector<double>& theta,
                                        const std::vector<SkillId>& order) {
    PfaParams p;
    for (std::size_t j = 0; j < order.size(); ++j) {
        p.by_skill[order[j]] = {theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]};
    }
    return p;
}

// Bernoulli log-likelihood of first-attempt correctness over all events.
inline double pfa_log_likelihood(const Dataset& d, const PfaParams& params) {
    const auto design = detail::build_pfa_design(d);
    const auto theta = pfa_param_vector(params, design.skill_order);
    double ll = 0.0;
    for (const auto& row : design.rows) {
        const double m = detail::pfa_row_m(row, theta);
        ll += row.y > 0.5 ? log_sigmoid(m) : log1m_sigmoid(m);
    }
    return ll;
}

// Analytic gradient in pfa_parameter_order layout: (beta, gamma, rho) per skill.
inline std::vector<double> pfa_gradient(const Dataset& d, const PfaParams& params) {
    const auto design = detail::build_pfa_design(d);
    const auto theta = pfa_param_vector(params, design.skill_order);
    std::vector<double> grad(theta.size(), 0.0);
    for (const auto& row : design.rows) {
        const double resid = row.y - sigmoid(detail::pfa_row_m(row, theta));
        for (std::size_t i = 0; i < row.skill.size(); ++i) {
            const std::size_t base = 3 * row.skill[i];
            grad[base] += resid;
            grad[base + 1] += resid * row.s[i];
            grad[base + 2] += resid * row.f[i];
        }
    }
    return grad;
}

// Maximum-likelihood fit by damped Newton ascent on the concave logistic
// likelihood, from zero initialization. Stops at the gradient tolerance, or
// at the parameter-magnitude cap with a separation warning when the data are
// (near-)separable.
inline PfaFitResult fit_pfa(const Dataset& d, const OptSpec& opt = {}) {
    const auto design = detail::build_pfa_design(d);
    const std::size_t k = design.skill_order.size();
    if (k == 0 || design.rows.empty()) throw NoData("dataset has no events to fit");
    const std::size_t dim = 3 * k;

    // active parameter set: the restricted fit freezes gamma and rho at zero
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < k; ++j) {
        active.push_back(3 * j);
        if (!opt.intercept_only) {
            active.push_back(3 * j + 1);
            active.push_back(3 * j + 2);
        }
    }
    std::vector<std::size_t> slot(dim, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < active.size(); ++i) slot[active[i]] = i;
    const std::size_t adim = active.size();

    std::vector<double> theta(dim, 0.0);
    PfaFitResult result;

    auto log_lik = [&](const std::vector<double>& th) {
        double ll = 0.0;
        for (const auto& row : design.rows) {
            const double m = detail::pfa_row_m(row, th);
            ll += row.y > 0.5 ? log_sigmoid(m) : log1m_sigmoid(m);
        }
        return ll;
    };

    double current_ll = log_lik(theta);
    std::vector<double> grad(adim);
    std::vector<double> hess(adim * adim);
    std::vector<std::pair<std::size_t, double>> entries;

    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (const auto& row : design.rows) {
            const double p = sigmoid(detail::pfa_row_m(row, theta));
            const double resid = row.y - p;
            const double w = p * (1.0 - p);
            entries.clear();  // sparse row entries in active coordinates
            for (std::size_t i = 0; i < row.skill.size(); ++i) {
                const std::size_t base = 3 * row.skill[i];
                entries.emplace_back(slot[base], 1.0);
                if (!opt.intercept_only) {
                    entries.emplace_back(slot[base + 1], row.s[i]);
                    entries.emplace_back(slot[base + 2], row.f[i]);
                }
            }
            for (const auto& [ia, va] : entries) {
                grad[ia] += resid * va;
                for (const auto& [ib, vb] : entries) {
                    hess[ia * adim + ib] += w * va * vb;
                }
            }
        }

        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::fabs(g));
        result.grad_norm = gnorm;
        result.iterations = iter - 1;
        if (gnorm <= opt.tol) {
            result.params = pfa_params_from_vector(theta, design.skill_order);
            result.log_lik = current_ll;
            return result;
        }

        // Newton step with escalating ridge if the Hessian is singular
        SymSolveResult step;
        double jitter = 0.0;
        for (int attempt = 0; attempt < 6; ++attempt) {
            std::vector<double> h = hess;
            if (jitter > 0.0) {
                for (std::size_t i = 0; i < adim; ++i) h[i * adim + i] += jitter;
            }
            step = solve_spd(std::move(h), grad, adim);
            if (step.ok) break;
            jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0;
        }
        if (!step.ok) throw NonConvergence(gnorm, iter);

        // backtracking line search on the likelihood
        double scale = 1.0;
        std::vector<double> trial(dim);
        double trial_ll = -1e300;
        for (int half = 0; half < 40; ++half) {
            trial = theta;
            for (std::size_t i = 0; i < adim; ++i) trial[active[i]] += scale * step.x[i];
            trial_ll = log_lik(trial);
            if (trial_ll >= current_ll - 1e-12) break;
            scale *= 0.5;
        }
        theta = trial;
        current_ll = trial_ll;

        double max_param = 0.0;
        for (double t : theta) max_param = std::max(max_param, std::fabs(t));
        if (max_param >= opt.param_cap) {
            for (double& t : theta) t = std::clamp(t, -opt.param_cap, opt.param_cap);
            result.separation_warning = true;
            result.params = pfa_params_from_vector(theta, design.skill_order);
            result.log_lik = log_lik(theta);
            result.iterations = iter;
            return result;
        }
    }
    throw NonConvergence(result.grad_norm, opt.max_iter);
}

// Per-event knowledge estimate with strictly causal success/failure counts.
inline std::vector<PfaEstimate> pfa_trace(const Dataset& d, const PfaParams& params) {
    std::vector<PfaEstimate> out;
    out.reserve(d.n_events());
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        std::map<SkillId, std::pair<std::uint32_t, std::uint32_t>> counts;
        const auto& events = d.students[s].events;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const auto& ev = events[e];
            PfaEstimate est;
            est.ref = {s, e};
            double m = 0.0;
            for (const auto& sk : ev.skills) {
                const auto pit = params.by_skill.find(sk);
                if (pit == params.by_skill.end()) throw UnknownSkill(sk);
                const auto& c = counts[sk];
                est.s_counts.push_back(c.first);
                est.f_counts.push_back(c.second);
                m += pit->second.beta + pit->second.gamma * static_cast<double>(c.first) +
                     pit->second.rho * static_cast<double>(c.second);
            }
            est.m = m;
            est.p_m = sigmoid(m);
            out.push_back(std::move(est));
            for (const auto& sk : ev.skills) {
                auto& c = counts[sk];
                if (ev.first_attempt_correct) {
                    ++c.first;
                } else {
                    ++c.second;
                }
            }
        }
    }
    return out;
}

}  // namespace careless
