#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "careless/errors.hpp"
#include "careless/event_log.hpp"
#include "careless/features.hpp"
#include "careless/linalg.hpp"
#include "careless/math.hpp"
#include "careless/pfa.hpp"

#include "json.hpp"

namespace careless {

// logit(p_correct) = beta0 + beta1 * p(m) + omega, with omega a linear
// function of the 18 encoded behavioral predictors. A published-coefficient
// model carries no beta0/beta1 and can only score omega.
struct BkfcModel {
    std::optional<double> beta0;
    std::optional<double> beta1;
    std::array<double, kEncodedWidth> omega_betas{};
    std::uint64_t manifest_hash = 0;
};

struct BkfcFitResult {
    BkfcModel model;
    double log_lik = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool separation_warning = false;
    bool collinearity_warning = false;
    double condition_number = 0.0;
};

enum class CdfMode { raw, standardized };

struct CarelessnessEstimate {
    EventRef ref;
    double omega = 0.0;
    double probability = 0.5;
};

// Behavioral score: dot product of the omega coefficients with the encoded
// features. Excludes the intercept and the p(m) term.
inline double omega(const std::array<double, kEncodedWidth>& encoded, const BkfcModel& model) {
    double w = 0.0;
    for (std::size_t i = 0; i < kEncodedWidth; ++i) w += model.omega_betas[i] * encoded[i];
    return w;
}

// Fits Eq.-style logistic regression of first-attempt correctness on
// [1, p(m), features] over ALL first attempts. Columns are standardized
// internally for the Newton solve and the coefficients mapped back, so the
// reported model is on raw feature scales.
inline BkfcFitResult fit_bkfc(const Dataset& d, const std::vector<PfaEstimate>& pfa,
                              const FeatureMatrix& X, const OptSpec& opt = {}) {
    const std::size_t n = X.rows.size();
    if (n == 0) throw NoData("no events to fit");
    if (pfa.size() != n) {
        throw ManifestMismatch("PFA estimates and feature matrix are not aligned");
    }
    if (X.manifest_hash != feature_manifest_hash()) {
        throw ManifestMismatch("feature matrix manifest does not match this build");
    }
    constexpr std::size_t dim = 2 + kEncodedWidth;

    std::vector<double> y(n);
    {
        const auto refs = all_events(d);
        if (refs.size() != n) throw ManifestMismatch("feature matrix does not cover the dataset");
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = event_at(d, refs[i]).first_attempt_correct ? 1.0 : 0.0;
        }
    }

    auto design_value = [&](std::size_t row, std::size_t col) -> double {
        if (col == 0) return 1.0;
        if (col == 1) return pfa[row].p_m;
        return X.rows[row][col - 2];
    };

    // column RMS scales (zero-variance columns keep scale 1)
    std::array<double, dim> scale;
    for (std::size_t c = 0; c < dim; ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = design_value(r, c);
            ss += v * v;
        }
        const double rms = std::sqrt(ss / static_cast<double>(n));
        scale[c] = rms > 0.0 ? rms : 1.0;
    }

    BkfcFitResult result;

    // condition number of the scaled cross-product
    {
        std::vector<double> xtx(dim * dim, 0.0);
        std::vector<double> xrow(dim);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < dim; ++c) xrow[c] = design_value(r, c) / scale[c];
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = 0; b <= a; ++b) xtx[a * dim + b] += xrow[a] * xrow[b];
        }
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = a + 1; b < dim; ++b) xtx[a * dim + b] = xtx[b * dim + a];
        const EigenRange er = sym_eigen_range(xtx, dim);
        result.condition_number = er.min > 0.0 ? er.max / er.min
                                               : std::numeric_limits<double>::infinity();
        result.collinearity_warning = !(result.condition_number <= 1e10);
    }
    const double ridge = result.collinearity_warning ? 1e-8 : 0.0;

    std::vector<double> theta(dim, 0.0);  // in scaled coordinates
    auto row_logit = [&](std::size_t r, const std::vector<double>& th) {
        double m = 0.0;
        for (std::size_t c = 0; c < dim; ++c) m += th[c] * design_value(r, c) / scale[c];
        return m;
    };
    auto log_lik = [&](const std::vector<double>& th) {
        double ll = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double m = row_logit(r, th);
            ll += y[r] > 0.5 ? log_sigmoid(m) : log1m_sigmoid(m);
        }
        return ll;
    };

    double current_ll = log_lik(theta);
    std::vector<double> grad(dim);
    std::vector<double> hess(dim * dim);
    std::vector<double> xrow(dim);

    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < dim; ++c) xrow[c] = design_value(r, c) / scale[c];
            double m = 0.0;
            for (std::size_t c = 0; c < dim; ++c) m += theta[c] * xrow[c];
            const double p = sigmoid(m);
            const double resid = y[r] - p;
            const double w = p * (1.0 - p);
            for (std::size_t a = 0; a < dim; ++a) {
                grad[a] += resid * xrow[a];
                for (std::size_t b = 0; b <= a; ++b) hess[a * dim + b] += w * xrow[a] * xrow[b];
            }
        }
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = a + 1; b < dim; ++b) hess[a * dim + b] = hess[b * dim + a];

        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::fabs(g));
        result.grad_norm = gnorm;
        result.iterations = iter - 1;
        if (gnorm <= opt.tol) break;

        SymSolveResult step;
        double jitter = ridge;
        for (int attempt = 0; attempt < 8; ++attempt) {
            std::vector<double> h = hess;
            if (jitter > 0.0) {
                for (std::size_t i = 0; i < dim; ++i) h[i * dim + i] += jitter;
            }
            step = solve_spd(std::move(h), grad, dim);
            if (step.ok) break;
            jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0;
        }
        if (!step.ok) throw NonConvergence(gnorm, iter);

        double scale_step = 1.0;
        std::vector<double> trial(dim);
        double trial_ll = -1e300;
        for (int half = 0; half < 40; ++half) {
            trial = theta;
            for (std::size_t i = 0; i < dim; ++i) trial[i] += scale_step * step.x[i];
            trial_ll = log_lik(trial);
            if (trial_ll >= current_ll - 1e-12) break;
            scale_step *= 0.5;
        }
        theta = trial;
        current_ll = trial_ll;

        double max_param = 0.0;
        for (std::size_t c = 0; c < dim; ++c) max_param = std::max(max_param, std::fabs(theta[c] / scale[c]));
        if (max_param >= opt.param_cap) {
            for (std::size_t c = 0; c < dim; ++c) {
                theta[c] = std::clamp(theta[c] / scale[c], -opt.param_cap, opt.param_cap) * scale[c];
            }
            result.separation_warning = true;
            current_ll = log_lik(theta);
            result.iterations = iter;
            break;
        }
        if (iter == opt.max_iter) throw NonConvergence(result.grad_norm, iter);
    }

    result.log_lik = current_ll;
    result.model.beta0 = theta[0] / scale[0];
    result.model.beta1 = theta[1] / scale[1];
    for (std::size_t i = 0; i < kEncodedWidth; ++i) {
        result.model.omega_betas[i] = theta[2 + i] / scale[2 + i];
    }
    result.model.manifest_hash = X.manifest_hash;
    return result;
}

// Converts negated behavioral scores of incorrect attempts into carelessness
// probabilities. raw: Phi(-omega). standardized: Phi((-omega - mean)/sd) with
// the moments taken over this input set.
inline std::vector<double> carelessness_from_omega(const std::vector<double>& omegas,
                                                   CdfMode mode = CdfMode::raw) {
    std::vector<double> probs(omegas.size());
    if (mode == CdfMode::raw) {
        for (std::size_t i = 0; i < omegas.size(); ++i) probs[i] = normal_cdf(-omegas[i]);
        return probs;
    }
    std::vector<double> neg(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) neg[i] = -omegas[i];
    const double mu = mean(neg);
    const double sd = sample_sd(neg);
    if (!(sd > 0.0)) throw ZeroVariance("standardized CDF mode requires variation in omega");
    for (std::size_t i = 0; i < omegas.size(); ++i) probs[i] = normal_cdf((neg[i] - mu) / sd);
    return probs;
}

// Scores every incorrect event in the dataset; multi-skill items and the last
// opportunities of a skill are all covered (no lookahead requirement).
inline std::vector<CarelessnessEstimate> score_bkfc(const Dataset& d, const FeatureMatrix& X,
                                                    const BkfcModel& model,
                                                    CdfMode mode = CdfMode::raw) {
    if (model.manifest_hash != X.manifest_hash || X.manifest_hash != feature_manifest_hash()) {
        throw ManifestMismatch("model coefficients were fitted against a different manifest");
    }
    const auto split = split_correct_incorrect(d);
    std::vector<CarelessnessEstimate> out(split.incorrect.size());
    std::vector<double> omegas(split.incorrect.size());
    for (std::size_t i = 0; i < split.incorrect.size(); ++i) {
        omegas[i] = omega(X.row(split.incorrect[i]), model);
    }
    const auto probs = carelessness_from_omega(omegas, mode);
    for (std::size_t i = 0; i < split.incorrect.size(); ++i) {
        out[i] = {split.incorrect[i], omegas[i], probs[i]};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Published-coefficient fixture

// Schema: {"beta0": null|number, "beta1": null|number,
//          "coefficients": [{"feature": name, "value": number} x 18]}
// in feature-manifest order.
inline BkfcModel load_published_model_json(const nlohmann::json& j) {
    BkfcModel model;
    if (!j.contains("coefficients") || !j["coefficients"].is_array()) {
        throw SchemaError("missing coefficients array");
    }
    const auto& coefs = j["coefficients"];
    const auto& manifest = feature_manifest();
    if (coefs.size() != manifest.size()) {
        throw SchemaError("expected " + std::to_string(manifest.size()) +
                          " coefficients, found " + std::to_string(coefs.size()));
    }
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& c = coefs[i];
        if (!c.contains("feature") || !c.contains("value") || !c["value"].is_number()) {
            throw SchemaError("coefficient " + std::to_string(i) + " malformed");
        }
        if (c["feature"].get<std::string>() != manifest[i]) {
            throw SchemaError("coefficient " + std::to_string(i) + " is '" +
                              c["feature"].get<std::string>() + "', expected '" + manifest[i] +
                              "'");
        }
        model.omega_betas[i] = c["value"].get<double>();
    }
    if (j.contains("beta0") && j["beta0"].is_number()) model.beta0 = j["beta0"].get<double>();
    if (j.contains("beta1") && j["beta1"].is_number()) model.beta1 = j["beta1"].get<double>();
    model.manifest_hash = feature_manifest_hash();
    return model;
}

inline BkfcModel load_published_model(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return load_published_model_json(j);
}

}  // namespace careless
