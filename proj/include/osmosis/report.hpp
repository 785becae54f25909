#pragma once

// JSON serialization of run reports and synthetic-experiment specs (nlohmann/json).

#include "osmosis/analysis.hpp"
#include "osmosis/solver.hpp"
#include "osmosis/stepper.hpp"
#include "osmosis/synth.hpp"

#include <json.hpp>

#include <string>

namespace osmosis {

using json = nlohmann::ordered_json;

/// `include_timing = false` zeroes wall-clock fields so identical runs serialize identically.
inline json to_json(const EvolutionReport& r, bool include_timing = true) {
    json j;
    j["steps"] = r.steps;
    j["status"] = std::string(to_string(r.status));
    j["wall_ms"] = include_timing ? r.wall_ms : 0.0;
    j["initial_mass"] = r.initial_mass;
    j["mass_drift_relative"] = r.mass_drift();
    j["min_value"] = r.final_min();
    j["final_relative_change"] = r.final_relative_change();
    j["max_clamp"] = r.max_clamp;
    j["quality_warnings"] = r.quality_warnings;
    j["mass"] = r.mass;
    j["min_series"] = r.min_value;
    j["relative_change"] = r.relative_change;
    j["tau"] = r.tau_used;
    j["inner_iterations"] = r.inner_iterations;
    j["residuals"] = r.residual;
    return j;
}

inline json to_json(const MetricReport& m) {
    json j;
    j["mean"] = m.mean;
    j["mass"] = m.mass;
    j["min"] = m.min;
    j["max"] = m.max;
    j["ssim"] = m.ssim ? json(*m.ssim) : json(nullptr);
    j["energy"] = m.energy ? json(*m.energy) : json(nullptr);
    return j;
}

inline json to_json(const SchemeConfig& c, const SolverConfig& s) {
    json j;
    j["scheme"] = std::string(to_string(c.scheme));
    j["tau"] = c.tau;
    j["max_steps"] = c.max_steps;
    j["stop_rule"] = std::string(to_string(c.stop_rule));
    j["tol"] = c.tol;
    j["p"] = c.diffusivity.p;
    j["epsilon"] = c.diffusivity.epsilon;
    j["diffusivity"] =
        c.diffusivity.mode == DiffusivityMode::LinearBaseline ? "linear" : "nonlinear";
    j["solver"] = std::string(to_string(s.method));
    j["omega"] = s.omega;
    j["solver_tol"] = s.tol;
    return j;
}

/// {"rect": [row0, col0, row1, col1]} or {"polygon": [[row, col], ...]}, plus "c", "sigma",
/// "mask_width".
inline ShadowSpec shadow_spec_from_json(const json& j) {
    ShadowSpec s;
    try {
        if (j.contains("rect")) {
            const auto& r = j.at("rect");
            if (!r.is_array() || r.size() != 4) throw ArgumentError("rect needs 4 integers");
            s.rect = Rect{r[0].get<std::size_t>(), r[1].get<std::size_t>(), r[2].get<std::size_t>(),
                          r[3].get<std::size_t>()};
        } else if (j.contains("polygon")) {
            for (const auto& pt : j.at("polygon"))
                s.polygon.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
        } else {
            throw ArgumentError("shadow spec needs 'rect' or 'polygon'");
        }
        s.c = j.value("c", s.c);
        s.sigma = j.value("sigma", s.sigma);
        s.mask_width = j.value("mask_width", s.mask_width);
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("invalid shadow spec: ") + e.what());
    }
    if (!(s.c > 0.0)) throw ArgumentError("shadow spec: c must be > 0");
    if (!(s.sigma >= 0.0)) throw ArgumentError("shadow spec: sigma must be >= 0");
    return s;
}

}  // namespace osmosis
