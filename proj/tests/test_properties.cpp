#include "osmosis/osmosis.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace osmosis;
using Catch::Approx;

namespace {

struct Instance {
    GridSpec grid;
    Image v, u;
    Mask mask;
    int variant;  // 0 canonical, 1 shadow, 2 cdr
    double p;

    DriftField drift() const {
        if (variant == 1) return shadow_drift(v, mask);
        if (variant == 2) return cdr_drift(v, mask);
        return canonical_drift(v);
    }
};

Instance draw(std::uint64_t seed) {
    SplitMix64 rng(seed * 7919 + 13);
    const auto rows = static_cast<std::size_t>(rng.uniform(2.0, 14.0));
    const auto cols = static_cast<std::size_t>(rng.uniform(2.0, 14.0));
    const auto g = make_grid(rows, cols, rng.uniform() < 0.2 ? 0.5 : 1.0);
    const double vmax = rng.uniform(2.0, 1000.0);
    Instance in{g,
                random_positive_image(g, rng, 0.01 * vmax, vmax),
                random_positive_image(g, rng, 0.1, 300.0),
                oracle::random_mask(g, rng.next(), rng.uniform(0.1, 0.9)),
                static_cast<int>(rng.next() % 3),
                std::min(1.0 + rng.uniform(), 1.95)};
    return in;
}

}  // namespace

TEST_CASE("operator invariants on random instances", "[property]") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const Instance in = draw(seed);
        DiffusivityParams params;
        params.p = in.p;
        const auto drift = in.drift();
        const auto op = assemble(pointwise_g(in.u, in.v, params, &drift), drift, in.grid);
        const auto r = verify_structure(op);
        INFO("seed " << seed);
        CHECK(r.ok());
        if (in.variant == 0) {
            const Image av = apply(op, in.v);
            double m = 0.0, vmax = 0.0;
            for (std::size_t p = 0; p < av.size(); ++p) {
                m = std::max(m, std::abs(av[p]));
                vmax = std::max(vmax, in.v[p]);
            }
            CHECK(m <= 1e-12 * r.scale * vmax);
        }
    }
}

TEST_CASE("steppers keep mass and sign on random instances", "[property]") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Instance in = draw(1000 + seed);
        const auto drift = in.drift();
        DiffusivityParams params;
        params.p = in.p;
        const auto op = assemble(pointwise_g(in.u, in.v, params, &drift), drift, in.grid);
        const double m0 = total_mass(in.u.values());
        INFO("seed " << seed);

        const Image e = explicit_step(in.u, op, explicit_stability_bound(op));
        CHECK(total_mass(e.values()) == Approx(m0).epsilon(1e-12));
        for (double x : e.values()) CHECK(x >= -1e-12 * m0);

        SolverConfig cfg;
        cfg.tol = 1e-11;
        const auto s = semi_implicit_step(in.u, op, 1e3, cfg);
        CHECK(total_mass(s.u.values()) == Approx(m0).epsilon(1e-8));
        CHECK(s.min_before_clamp >= -1e-8 * m0);
        CHECK_FALSE(s.quality_warning);
    }
}

TEST_CASE("dense semi-implicit iteration matrix is column stochastic", "[property]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Instance in = draw(5000 + seed);
        if (in.grid.size() > 36) continue;
        const auto drift = in.drift();
        const auto op = assemble(pointwise_g(in.u, in.v, {}, &drift), drift, in.grid);
        const auto r = dense_spectrum(op, 1e2, Scheme::SemiImplicit);
        INFO("seed " << seed);
        CHECK(r.min_entry >= -1e-12);
        CHECK(r.max_column_sum_error <= 1e-9);
        CHECK(r.max_other_modulus <= 1.0 + 1e-9);
    }
}
