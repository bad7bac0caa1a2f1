#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "careless/bkt.hpp"
#include "careless/errors.hpp"
#include "careless/event_log.hpp"
#include "careless/math.hpp"
#include "careless/pfa.hpp"

namespace careless {

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

namespace detail {

// average ranks (1-based) with ties sharing the mean rank
inline std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return v[a] < v[b];
        return a < b;
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw ConstantInput("zero rank variance");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

struct SpearmanOptions {
    // exact permutation p-value; defaults on below n = 10
    std::optional<bool> exact;
};

// Average-rank transform followed by Pearson on the ranks. Two-sided p via
// the t approximation t = rho * sqrt((n-2)/(1-rho^2)); an exact permutation
// p-value is used for n < 10 (or when requested).
inline SpearmanResult spearman(std::span<const double> x, std::span<const double> y,
                               const SpearmanOptions& opts = {}) {
    if (x.size() != y.size() || x.size() < 3) {
        throw NoData("spearman needs two samples of equal length >= 3");
    }
    const auto rx = detail::average_ranks(x);
    const auto ry = detail::average_ranks(y);
    SpearmanResult r;
    r.n = x.size();
    r.rho = detail::pearson(rx, ry);

    const bool exact = opts.exact.value_or(r.n < 10);
    if (!exact) {
        const double denom = 1.0 - r.rho * r.rho;
        if (denom <= 0.0) {
            r.p_value = 0.0;
        } else {
            const double t = r.rho * std::sqrt((static_cast<double>(r.n) - 2.0) / denom);
            r.p_value = t_two_sided_p(t, static_cast<double>(r.n) - 2.0);
        }
        return r;
    }

    // exact permutation distribution of |rho| (n <= 9 keeps n! tractable)
    std::vector<std::size_t> perm(r.n);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t count_ge = 0;
    std::size_t total = 0;
    std::vector<double> permuted(r.n);
    do {
        for (std::size_t i = 0; i < r.n; ++i) permuted[i] = ry[perm[i]];
        const double rho = detail::pearson(rx, permuted);
        if (std::fabs(rho) >= std::fabs(r.rho) - 1e-12) ++count_ge;
        ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    r.p_value = static_cast<double>(count_ge) / static_cast<double>(total);
    return r;
}

// ---------------------------------------------------------------------------
// Ordinary least squares

struct OlsCoefficient {
    double b = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p = 1.0;
};

struct OlsResult {
    std::vector<OlsCoefficient> coefficients;  // [intercept, predictors...]
    double r_squared = 0.0;
    double f_statistic = 0.0;
    double f_p_value = 1.0;
    std::size_t df = 0;  // n - p - 1
};

// Normal-equations OLS with an intercept prepended to the predictor columns.
// Standard errors from sigma^2 (X'X)^-1; two-sided t p-values; overall F.
inline OlsResult ols(std::span<const double> y,
                     const std::vector<std::vector<double>>& predictors) {
    const std::size_t n = y.size();
    const std::size_t p = predictors.size();
    for (const auto& col : predictors) {
        if (col.size() != n) throw NoData("predictor column length mismatch");
    }
    if (n <= p + 1) throw NoData("ols needs n > p + 1");
    const std::size_t dim = p + 1;

    auto x_at = [&](std::size_t row, std::size_t col) -> double {
        return col == 0 ? 1.0 : predictors[col - 1][row];
    };

    std::vector<double> xtx(dim * dim, 0.0);
    std::vector<double> xty(dim, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t a = 0; a < dim; ++a) {
            xty[a] += x_at(r, a) * y[r];
            for (std::size_t b = 0; b <= a; ++b) xtx[a * dim + b] += x_at(r, a) * x_at(r, b);
        }
    }
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = a + 1; b < dim; ++b) xtx[a * dim + b] = xtx[b * dim + a];

    std::vector<double> xtx_inv;
    try {
        xtx_inv = invert_spd(xtx, dim);
    } catch (const RankDeficient&) {
        throw RankDeficient("design matrix is rank deficient");
    }
    std::vector<double> beta(dim, 0.0);
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b) beta[a] += xtx_inv[a * dim + b] * xty[b];

    const double ybar = mean(y);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double fit = 0.0;
        for (std::size_t a = 0; a < dim; ++a) fit += beta[a] * x_at(r, a);
        ss_res += (y[r] - fit) * (y[r] - fit);
        ss_tot += (y[r] - ybar) * (y[r] - ybar);
    }

    OlsResult result;
    result.df = n - p - 1;
    const double sigma2 = ss_res / static_cast<double>(result.df);
    result.coefficients.resize(dim);
    for (std::size_t a = 0; a < dim; ++a) {
        OlsCoefficient& c = result.coefficients[a];
        c.b = beta[a];
        c.se = std::sqrt(sigma2 * xtx_inv[a * dim + a]);
        c.t = c.se > 0.0 ? c.b / c.se : 0.0;
        c.p = t_two_sided_p(c.t, static_cast<double>(result.df));
    }
    result.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    if (p > 0 && result.r_squared < 1.0) {
        result.f_statistic = (result.r_squared / static_cast<double>(p)) /
                             ((1.0 - result.r_squared) / static_cast<double>(result.df));
        result.f_p_value =
            f_upper_p(result.f_statistic, static_cast<double>(p), static_cast<double>(result.df));
    } else if (p > 0) {
        result.f_statistic = std::numeric_limits<double>::infinity();
        result.f_p_value = 0.0;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Student-level aggregation

struct StudentMeans {
    std::map<std::string, double> mean_by_student;
    std::vector<std::string> excluded;  // students with no estimates
};

inline StudentMeans student_level_carelessness(const std::vector<SlipEstimate>& estimates,
                                               const Dataset& d) {
    std::vector<double> sums(d.students.size(), 0.0);
    std::vector<std::size_t> counts(d.students.size(), 0);
    for (const auto& est : estimates) {
        sums[est.ref.student] += est.probability;
        ++counts[est.ref.student];
    }
    StudentMeans out;
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        if (counts[s] > 0) {
            out.mean_by_student[d.students[s].student_id] =
                sums[s] / static_cast<double>(counts[s]);
        } else {
            out.excluded.push_back(d.students[s].student_id);
        }
    }
    return out;
}

struct FinalKnowledgeOptions {
    // BKT: take the prior entering the last opportunity (default) or the
    // posterior after it.
    bool use_posterior = false;
};

// Per-student mean over practiced skills of p(L) at the last opportunity on
// each skill. Skills a student never practiced are excluded from their mean.
inline std::map<std::string, double> final_knowledge_bkt(
    const KnowledgeTrace& traces, const Dataset& d, const FinalKnowledgeOptions& opts = {}) {
    std::map<std::string, double> out;
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        const auto& by_skill = traces.per_student[s];
        if (by_skill.empty()) continue;
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& [skill, steps] : by_skill) {
            if (steps.empty()) continue;
            sum += opts.use_posterior ? steps.back().posterior : steps.back().prior;
            ++n;
        }
        if (n > 0) out[d.students[s].student_id] = sum / static_cast<double>(n);
    }
    return out;
}

// Per-student mean over practiced skills of p(m) at the last opportunity on
// each skill (the whole-event estimate at that opportunity).
inline std::map<std::string, double> final_knowledge_pfa(const std::vector<PfaEstimate>& estimates,
                                                         const Dataset& d) {
    // last event index per (student, skill)
    std::vector<std::map<SkillId, std::size_t>> last(d.students.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const EventRef ref = estimates[i].ref;
        const auto& ev = event_at(d, ref);
        for (const auto& sk : ev.skills) last[ref.student][sk] = i;
    }
    std::map<std::string, double> out;
    for (std::size_t s = 0; s < d.students.size(); ++s) {
        if (last[s].empty()) continue;
        double sum = 0.0;
        for (const auto& [skill, idx] : last[s]) sum += estimates[idx].p_m;
        out[d.students[s].student_id] = sum / static_cast<double>(last[s].size());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distribution summaries

struct DistributionSummary {
    double mean = 0.0;
    double sd = 0.0;
    std::array<std::size_t, 20> histogram{};  // fixed bins over [0, 1]
    double tail_mass = 0.0;                   // fraction in [0, 0.1] or [0.9, 1]
    double mid_mass = 0.0;                    // fraction in [0.4, 0.6]
    std::size_t n = 0;
};

inline DistributionSummary summarize_distribution(std::span<const double> values) {
    DistributionSummary s;
    s.n = values.size();
    if (values.empty()) return s;
    s.mean = mean(values);
    s.sd = sample_sd(values);
    std::size_t tails = 0;
    std::size_t mid = 0;
    for (const double v : values) {
        const auto bin = static_cast<std::size_t>(
            std::min(19.0, std::max(0.0, std::floor(v * 20.0))));
        ++s.histogram[bin];
        if (v <= 0.1 || v >= 0.9) ++tails;
        if (v >= 0.4 && v <= 0.6) ++mid;
    }
    s.tail_mass = static_cast<double>(tails) / static_cast<double>(s.n);
    s.mid_mass = static_cast<double>(mid) / static_cast<double>(s.n);
    return s;
}

}  // namespace careless
