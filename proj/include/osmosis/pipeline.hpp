#pragma once

#include "osmosis/analysis.hpp"
#include "osmosis/drift.hpp"
#include "osmosis/stepper.hpp"

#include <functional>
#include <future>
#include <vector>

namespace osmosis {

/// Plain osmosis: canonical drift from v, evolved from f.
inline Evolution filter(const Image& f, const Image& v, const SchemeConfig& cfg,
                        const SolverConfig& solver = {}) {
    return evolve(f, v, canonical_drift(v), cfg, solver);
}

/// Shadow (or light-spot) removal: u^0 = v = f, drift suppressed on the mask band.
inline Evolution shadow_remove(const Image& f, const Mask& band, const SchemeConfig& cfg,
                               const SolverConfig& solver = {}) {
    return evolve(f, f, shadow_drift(f, band), cfg, solver);
}

/// Light-spot removal runs the same model as shadow removal.
inline Evolution light_remove(const Image& f, const Mask& band, const SchemeConfig& cfg,
                              const SolverConfig& solver = {}) {
    return shadow_remove(f, band, cfg, solver);
}

/// Compact data representation: start from the flat image mean(v) and transport only along
/// edges inside the edge mask.
inline Evolution cdr(const Image& v, const Mask& edge_mask, const SchemeConfig& cfg,
                     const SolverConfig& solver = {}) {
    const Image f(v.grid(), mean_grey(v));
    return evolve(f, v, cdr_drift(v, edge_mask), cfg, solver);
}

/// Runs `fn` on every channel concurrently; results keep channel order.
inline std::vector<Evolution> per_channel(const std::vector<Image>& channels,
                                          const std::function<Evolution(const Image&)>& fn) {
    std::vector<std::future<Evolution>> jobs;
    jobs.reserve(channels.size());
    for (const Image& ch : channels) jobs.push_back(std::async(std::launch::async, fn, std::cref(ch)));
    std::vector<Evolution> out;
    out.reserve(channels.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace osmosis
