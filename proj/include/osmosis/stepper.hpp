#pragma once

#include "osmosis/diffusivity.hpp"
#include "osmosis/drift.hpp"
#include "osmosis/solver.hpp"
#include "osmosis/stencil.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

namespace osmosis {

enum class Scheme { Explicit, SemiImplicit };
enum class StopRule { RelativeChange, MseReference, FixedSteps };

inline std::string_view to_string(Scheme s) noexcept {
    return s == Scheme::Explicit ? "explicit" : "semi-implicit";
}
inline std::string_view to_string(StopRule r) noexcept {
    switch (r) {
        case StopRule::RelativeChange: return "relative-change";
        case StopRule::MseReference: return "mse-reference";
        case StopRule::FixedSteps: return "fixed-steps";
    }
    return "?";
}

struct SchemeConfig {
    Scheme scheme = Scheme::SemiImplicit;
    double tau = 1e3;
    std::size_t max_steps = 100;
    StopRule stop_rule = StopRule::RelativeChange;
    double tol = 1e-3;
    /// Ground truth for StopRule::MseReference.
    std::optional<Image> mse_reference;
    /// Explicit scheme only: shrink tau to the current stability bound instead of failing.
    bool adaptive_explicit = false;
    DiffusivityParams diffusivity{};

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw ArgumentError("tau must be finite and > 0");
        if (max_steps == 0) throw ArgumentError("max_steps must be >= 1");
        if (stop_rule != StopRule::FixedSteps && !(tol > 0.0))
            throw ArgumentError("stopping tolerance must be > 0");
        if (stop_rule == StopRule::MseReference && !mse_reference)
            throw ArgumentError("mse-reference stop rule needs a reference image");
        diffusivity.validate();
    }
};

enum class EvolutionStatus { Converged, MaxSteps, FixedSteps };

inline std::string_view to_string(EvolutionStatus s) noexcept {
    switch (s) {
        case EvolutionStatus::Converged: return "converged";
        case EvolutionStatus::MaxSteps: return "max-steps-reached";
        case EvolutionStatus::FixedSteps: return "fixed-steps";
    }
    return "?";
}

struct EvolutionReport {
    std::size_t steps = 0;
    double wall_ms = 0.0;
    EvolutionStatus status = EvolutionStatus::MaxSteps;
    double initial_mass = 0.0;
    std::vector<double> mass;
    std::vector<double> min_value;
    std::vector<double> relative_change;
    std::vector<double> tau_used;
    std::vector<std::size_t> inner_iterations;
    std::vector<double> residual;
    double max_clamp = 0.0;  // largest negative magnitude clamped to 0
    std::size_t quality_warnings = 0;

    double final_relative_change() const noexcept {
        return relative_change.empty() ? 0.0 : relative_change.back();
    }
    double mass_drift() const noexcept {
        return mass.empty() || initial_mass == 0.0 ? 0.0
                                                   : (mass.back() - initial_mass) / initial_mass;
    }
    double final_min() const noexcept { return min_value.empty() ? 0.0 : min_value.back(); }
};

inline double total_mass(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0);
}

/// u + tau A u. Refuses tau above 1 / max|a_ii|.
inline Image explicit_step(const Image& u, const StencilOperator& op, double tau) {
    require_same_grid(u.grid(), op.grid(), "explicit_step");
    const double bound = explicit_stability_bound(op);
    if (!(tau > 0.0) || tau > bound) throw StabilityError(tau, bound);
    Image au = apply(op, u);
    Image next(u.grid());
    for (std::size_t p = 0; p < u.size(); ++p) next[p] = u[p] + tau * au[p];
    return next;
}

struct SemiImplicitStep {
    Image u;
    SolveResult solve;
    double clamp_magnitude = 0.0;  // most negative value seen before clamping (as a magnitude)
    double min_before_clamp = 0.0;
    bool quality_warning = false;  // a value fell below -1e-8 max(u)
};

/// (I - tau A)^{-1} u. Negatives from solver tolerance are clamped to 0.
inline SemiImplicitStep semi_implicit_step(const Image& u, const StencilOperator& op, double tau,
                                           const SolverConfig& cfg) {
    if (!(tau > 0.0)) throw ArgumentError("tau must be > 0");
    SemiImplicitStep out{Image{}, solve(op, tau, u, cfg)};
    out.u = out.solve.x;
    const auto vals = out.u.values();
    const double umax = *std::max_element(vals.begin(), vals.end());
    out.min_before_clamp = *std::min_element(vals.begin(), vals.end());
    const double silent = 1e-8 * std::max(umax, 0.0);
    for (double& x : vals) {
        if (x < 0.0) {
            out.clamp_magnitude = std::max(out.clamp_magnitude, -x);
            if (-x > silent) out.quality_warning = true;
            x = 0.0;
        }
    }
    return out;
}

/// (mean f / mean v) v
inline Image steady_state_target(const Image& f, const Image& v) {
    require_same_grid(f.grid(), v.grid(), "steady_state_target");
    require_positive(f, "initial image f");
    require_positive(v, "reference image v");
    const double c = total_mass(f.values()) / total_mass(v.values());
    Image out(v.grid());
    for (std::size_t p = 0; p < v.size(); ++p) out[p] = c * v[p];
    return out;
}

namespace detail {
inline double relative_change(std::span<const double> next, std::span<const double> prev) {
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < next.size(); ++p) {
        const double d = next[p] - prev[p];
        num += d * d;
        den += prev[p] * prev[p];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double mse(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) s += (a[p] - b[p]) * (a[p] - b[p]);
    return s / static_cast<double>(a.size());
}
}  // namespace detail

struct Evolution {
    Image u;
    EvolutionReport report;
};

/// Lagged-coefficient evolution u^{k+1} = P(u^k) u^k from u^0 = f: each step recomputes g
/// from u^k, reassembles A(u^k) and takes one explicit or semi-implicit step.
inline Evolution evolve(const Image& f, const Image& v, const DriftField& drift,
                        const SchemeConfig& cfg, const SolverConfig& solver_cfg = {}) {
    cfg.validate();
    require_same_grid(f.grid(), v.grid(), "evolve f vs v");
    require_same_grid(f.grid(), drift.grid(), "evolve f vs drift");
    require_positive(f, "initial image f");
    require_positive(v, "reference image v");
    if (cfg.mse_reference) require_same_grid(f.grid(), cfg.mse_reference->grid(), "mse reference");

    const auto t0 = std::chrono::steady_clock::now();
    Evolution ev{f, {}};
    EvolutionReport& rep = ev.report;
    rep.initial_mass = total_mass(f.values());
    rep.status = cfg.stop_rule == StopRule::FixedSteps ? EvolutionStatus::FixedSteps
                                                        : EvolutionStatus::MaxSteps;

    for (std::size_t k = 0; k < cfg.max_steps; ++k) {
        const DiffusivityField g = pointwise_g(ev.u, v, cfg.diffusivity, &drift);
        const StencilOperator op = assemble(g, drift, f.grid());
        Image next;
        if (cfg.scheme == Scheme::Explicit) {
            double tau = cfg.tau;
            if (cfg.adaptive_explicit) tau = std::min(tau, explicit_stability_bound(op));
            next = explicit_step(ev.u, op, tau);
            rep.tau_used.push_back(tau);
            rep.inner_iterations.push_back(0);
            rep.residual.push_back(0.0);
        } else {
            SemiImplicitStep st = semi_implicit_step(ev.u, op, cfg.tau, solver_cfg);
            rep.tau_used.push_back(cfg.tau);
            rep.inner_iterations.push_back(st.solve.iterations);
            rep.residual.push_back(st.solve.residual);
            rep.max_clamp = std::max(rep.max_clamp, st.clamp_magnitude);
            if (st.quality_warning) ++rep.quality_warnings;
            next = std::move(st.u);
        }
        const auto nv = next.values();
        const double change = detail::relative_change(nv, ev.u.values());
        rep.mass.push_back(total_mass(nv));
        rep.min_value.push_back(*std::min_element(nv.begin(), nv.end()));
        rep.relative_change.push_back(change);
        ev.u = std::move(next);
        ++rep.steps;

        bool done = false;
        if (cfg.stop_rule == StopRule::RelativeChange)
            done = change < cfg.tol;
        else if (cfg.stop_rule == StopRule::MseReference)
            done = detail::mse(ev.u.values(), cfg.mse_reference->values()) < cfg.tol;
        if (done) {
            rep.status = EvolutionStatus::Converged;
            break;
        }
    }
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return ev;
}

}  // namespace osmosis
