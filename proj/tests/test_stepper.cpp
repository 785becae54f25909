#include "osmosis/analysis.hpp"
#include "osmosis/stepper.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace osmosis;
using Catch::Approx;

namespace {

StencilOperator operator_at(const Image& u, const Image& v, const DriftField& d) {
    return assemble(pointwise_g(u, v, {}, &d), d, u.grid());
}

double max_of(const Image& x) { return *std::max_element(x.values().begin(), x.values().end()); }
double min_of(const Image& x) { return *std::min_element(x.values().begin(), x.values().end()); }

}  // namespace

TEST_CASE("explicit step refuses tau above the bound", "[stepper]") {
    const auto g = make_grid(6, 6);
    const Image v = oracle::random_image(g, 1);
    const Image u = oracle::random_image(g, 2);
    const auto d = canonical_drift(v);
    const auto op = operator_at(u, v, d);
    const double bound = explicit_stability_bound(op);
    try {
        explicit_step(u, op, 1.01 * bound);
        FAIL("expected StabilityError");
    } catch (const StabilityError& e) {
        CHECK(e.bound() == bound);
        CHECK(e.tau() == 1.01 * bound);
    }
    const Image next = explicit_step(u, op, bound);
    CHECK(min_of(next) >= 0.0);
    CHECK(total_mass(next.values()) == Approx(total_mass(u.values())).epsilon(1e-13));
}

TEST_CASE("reference image is a fixed point of both schemes", "[stepper]") {
    const auto g = make_grid(7, 5);
    const Image v = oracle::random_image(g, 3);
    const auto d = canonical_drift(v);
    const auto op = operator_at(v, v, d);
    const Image e = explicit_step(v, op, explicit_stability_bound(op));
    CHECK(oracle::rel_diff(e.vector(), v.vector()) <= 1e-13);
    for (double tau : {1.0, 1e3, 1e6}) {
        const auto s = semi_implicit_step(v, op, tau, {});
        CHECK(oracle::rel_diff(s.u.vector(), v.vector()) <= 1e-9);
    }
}

TEST_CASE("constant state under the plain laplacian is unchanged", "[stepper]") {
    const auto g = make_grid(4, 4);
    DiffusivityField gf(g);
    gf.set_pixels(std::vector<double>(g.size(), 1.0));
    const auto op = assemble(gf, DriftField(g), g);
    const Image u(g, 7.0);
    CHECK(explicit_step(u, op, 0.25) == u);
}

TEST_CASE("semi-implicit step agrees with explicit step for small tau", "[stepper]") {
    const auto g = make_grid(6, 6);
    const Image v = oracle::random_image(g, 11);
    const Image u = oracle::random_image(g, 12);
    const auto d = canonical_drift(v);
    const auto op = operator_at(u, v, d);
    const double tau = 1e-4;
    REQUIRE(tau <= explicit_stability_bound(op));
    SolverConfig cfg;
    cfg.tol = 1e-14;
    const auto s = semi_implicit_step(u, op, tau, cfg);
    const Image e = explicit_step(u, op, tau);
    CHECK(oracle::rel_diff(s.u.vector(), e.vector()) <= 1e-6);
    // and the difference is second order: tau^2 A^2 u
    const Image au = apply(op, u);
    const Image a2u = apply(op, au);
    Image predicted = e;
    for (std::size_t p = 0; p < g.size(); ++p) predicted[p] += tau * tau * a2u[p];
    CHECK(oracle::rel_diff(s.u.vector(), predicted.vector()) <= 1e-9);
}

TEST_CASE("semi-implicit step conserves mass", "[stepper]") {
    const auto g = make_grid(10, 12);
    const Image v = oracle::random_image(g, 21);
    Image u = oracle::random_image(g, 22);
    const auto d = canonical_drift(v);
    SolverConfig cfg;
    cfg.tol = 1e-10;
    for (int k = 0; k < 5; ++k) {
        const auto s = semi_implicit_step(u, operator_at(u, v, d), 1e3, cfg);
        CHECK(total_mass(s.u.values()) == Approx(total_mass(u.values())).epsilon(1e-8));
        CHECK(min_of(s.u) >= 0.0);
        u = s.u;
    }
}

TEST_CASE("steady state target", "[stepper]") {
    const auto g = make_grid(4, 4);
    const Image v = oracle::random_image(g, 3);
    CHECK(oracle::rel_diff(steady_state_target(v, v).vector(), v.vector()) <= 1e-15);
    const Image t = steady_state_target(Image(g, 2.0), Image(g, 1.0));
    for (double x : t.values()) CHECK(x == 2.0);
    Image f = oracle::random_image(g, 5);
    const double fm = mean_grey(f), vm = mean_grey(v);
    for (double& x : f.values()) x *= 10.0 / fm;
    Image v5 = v;
    for (double& x : v5.values()) x *= 5.0 / vm;
    const Image t2 = steady_state_target(f, v5);
    for (std::size_t p = 0; p < g.size(); ++p) CHECK(t2[p] == Approx(2.0 * v5[p]).epsilon(1e-13));
}

TEST_CASE("evolution converges to the rescaled reference", "[stepper]") {
    const auto g = make_grid(16, 16);
    const Image v = oracle::random_image(g, 41);
    const Image f = oracle::random_image(g, 42);
    SchemeConfig cfg;
    cfg.stop_rule = StopRule::FixedSteps;
    cfg.max_steps = 60;
    const auto ev = evolve(f, v, canonical_drift(v), cfg);
    const Image target = steady_state_target(f, v);
    double err = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) err = std::max(err, std::abs(ev.u[p] - target[p]));
    CHECK(err <= 1e-3 * mean_grey(v));
    CHECK(ev.report.steps == 60);
    CHECK(ev.report.status == EvolutionStatus::FixedSteps);
    CHECK(ev.report.mass.size() == 60);
    CHECK(ev.report.relative_change.size() == 60);
    CHECK(ev.report.inner_iterations.size() == 60);
    CHECK(std::abs(ev.report.mass_drift()) <= 1e-8);
}

TEST_CASE("f equal to v terminates immediately", "[stepper]") {
    const auto g = make_grid(8, 8);
    const Image v = oracle::random_image(g, 7);
    const auto ev = evolve(v, v, canonical_drift(v), SchemeConfig{});
    CHECK(ev.report.steps == 1);
    CHECK(ev.report.status == EvolutionStatus::Converged);
    CHECK(ev.report.final_relative_change() <= 1e-9);
    CHECK(oracle::rel_diff(ev.u.vector(), v.vector()) <= 1e-9);
}

TEST_CASE("zero drift flattens towards the mean", "[stepper]") {
    const auto g = make_grid(16, 16);
    const Image f = oracle::random_image(g, 51);
    const Image v(g, 1.0);
    const DriftField none = shadow_drift(v, Mask(g, true));
    const double m0 = total_mass(f.values());
    Image u = f;
    double range = max_of(u) - min_of(u);
    const double range0 = range;
    SolverConfig cfg;
    cfg.tol = 1e-10;
    for (int k = 0; k < 10000; ++k) {
        const auto s = semi_implicit_step(u, operator_at(u, v, none), 1e3, cfg);
        u = s.u;
        const double r = max_of(u) - min_of(u);
        REQUIRE(r <= range + 1e-9 * range0);
        range = r;
        REQUIRE(total_mass(u.values()) == Approx(m0).epsilon(1e-8));
        if (range <= 1e-6 * range0) break;
    }
    CHECK(range < 1e-2 * range0);
    for (double x : u.values()) CHECK(x == Approx(m0 / static_cast<double>(g.size())).epsilon(1e-2));
}

TEST_CASE("explicit and semi-implicit steady states agree", "[stepper]") {
    const auto g = make_grid(16, 16);
    const Image v = oracle::random_image(g, 61);
    const Image f = oracle::random_image(g, 62);
    const auto d = canonical_drift(v);
    SchemeConfig ex;
    ex.scheme = Scheme::Explicit;
    ex.adaptive_explicit = true;
    ex.max_steps = 200000;
    ex.tol = 1e-9;
    ex.tau = 1.0;
    SchemeConfig si;
    si.max_steps = 200;
    si.tol = 1e-9;
    const auto a = evolve(f, v, d, ex);
    const auto b = evolve(f, v, d, si);
    double err = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        err = std::max(err, std::abs(a.u[p] - b.u[p]));
        scale = std::max(scale, std::abs(b.u[p]));
    }
    CHECK(err <= 1e-3 * scale);
    CHECK(a.report.min_value.back() >= 0.0);
    CHECK(std::abs(a.report.mass_drift()) <= 1e-10);
}

TEST_CASE("mse stop rule and validation", "[stepper]") {
    const auto g = make_grid(8, 8);
    const Image v = oracle::random_image(g, 71);
    const Image f = oracle::random_image(g, 72);
    SchemeConfig cfg;
    cfg.stop_rule = StopRule::MseReference;
    CHECK_THROWS_AS(evolve(f, v, canonical_drift(v), cfg), ArgumentError);
    cfg.mse_reference = steady_state_target(f, v);
    cfg.tol = 1e-6;
    const auto ev = evolve(f, v, canonical_drift(v), cfg);
    CHECK(ev.report.status == EvolutionStatus::Converged);
    SchemeConfig bad;
    bad.tau = -1.0;
    CHECK_THROWS_AS(evolve(f, v, canonical_drift(v), bad), ArgumentError);
    Image neg = f;
    neg[3] = -1.0;
    CHECK_THROWS_AS(evolve(neg, v, canonical_drift(v), SchemeConfig{}), ArgumentError);
}
