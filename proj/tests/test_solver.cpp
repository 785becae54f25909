#include "osmosis/solver.hpp"
#include "osmosis/stepper.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace osmosis;
using Catch::Approx;

namespace {

StencilOperator random_operator(const GridSpec& g, std::uint64_t seed, const Image& v) {
    const Image u = oracle::random_image(g, seed + 500);
    return assemble(pointwise_g(u, v, {}), canonical_drift(v), g);
}

const SolverMethod kMethods[] = {SolverMethod::Sor, SolverMethod::GaussSeidel,
                                 SolverMethod::StabilizedKrylov};

}  // namespace

TEST_CASE("method names", "[solver]") {
    for (SolverMethod m : kMethods) CHECK(parse_solver_method(to_string(m)) == m);
    CHECK(parse_solver_method("gs") == SolverMethod::GaussSeidel);
    CHECK(parse_solver_method("bicgstab") == SolverMethod::StabilizedKrylov);
    CHECK_THROWS_AS(parse_solver_method("cg"), ArgumentError);
    SolverConfig c;
    c.omega = 2.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c.omega = 1.0;
    c.tol = 0.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
}

TEST_CASE("tau zero is the identity", "[solver]") {
    const auto g = make_grid(4, 4);
    const Image v = oracle::random_image(g, 1);
    const Image b = oracle::random_image(g, 2);
    const auto op = random_operator(g, 3, v);
    for (SolverMethod m : kMethods) {
        SolverConfig cfg;
        cfg.method = m;
        const auto r = solve(op, 0.0, b, cfg);
        CHECK(r.x == b);
        CHECK(r.iterations == 0);
    }
}

TEST_CASE("reference image is a fixed point of the system", "[solver]") {
    const auto g = make_grid(6, 5);
    const Image v = oracle::random_image(g, 4);
    const auto op = random_operator(g, 5, v);
    for (SolverMethod m : kMethods)
        for (double tau : {1.0, 1e3, 1e6}) {
            SolverConfig cfg;
            cfg.method = m;
            const auto r = solve(op, tau, v, cfg);
            CHECK(oracle::rel_diff(r.x.vector(), v.vector()) <= 1e-9);
        }
}

TEST_CASE("solution matches a dense direct solve", "[solver]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = make_grid(4, 4);
        const Image v = oracle::random_image(g, seed);
        const Image u = oracle::random_image(g, seed + 40);
        const Image b = oracle::random_image(g, seed + 80);
        const auto gfield = pointwise_g(u, v, {});
        const auto op = assemble(gfield, canonical_drift(v), g);
        const double tau = 1e3;

        std::vector<double> gp(gfield.pixels().begin(), gfield.pixels().end());
        const Eigen::MatrixXd a = oracle::dense_matrix(g, gp, v);
        const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(16, 16) - tau * a;
        const Eigen::VectorXd x = m.fullPivLu().solve(oracle::to_eigen(b));
        const std::vector<double> expect(x.data(), x.data() + x.size());

        for (SolverMethod meth : kMethods) {
            SolverConfig cfg;
            cfg.method = meth;
            cfg.tol = 1e-12;
            cfg.max_inner_iters = 200000;
            const auto r = solve(op, tau, b, cfg);
            CHECK(oracle::rel_diff(r.x.vector(), expect) <= 1e-8);
            // true residual
            Image check(g);
            detail::system_apply(op, tau, r.x.values(), check.values());
            CHECK(oracle::rel_diff(check.vector(), b.vector()) == Approx(r.residual).margin(1e-15).epsilon(1e-6));
        }
    }
}

TEST_CASE("mass transfer and positivity", "[solver]") {
    const auto g = make_grid(12, 10);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Image v = oracle::random_image(g, seed);
        const Image b = oracle::random_image(g, seed + 9, 0.0, 3.0);
        const auto op = random_operator(g, seed, v);
        SolverConfig cfg;
        cfg.tol = 1e-11;
        const auto r = solve(op, 50.0, b, cfg);
        double bmax = 0.0;
        for (double x : b.values()) bmax = std::max(bmax, x);
        CHECK(total_mass(r.x.values()) == Approx(total_mass(b.values())).epsilon(1e-9));
        for (double x : r.x.values()) CHECK(x >= -1e-11 * bmax);
    }
}

TEST_CASE("iteration limit raises a convergence error", "[solver]") {
    const auto g = make_grid(8, 8);
    const Image v = oracle::random_image(g, 1);
    const Image b = oracle::random_image(g, 2);
    const auto op = random_operator(g, 3, v);
    for (SolverMethod m : kMethods) {
        SolverConfig cfg;
        cfg.method = m;
        cfg.max_inner_iters = 2;
        cfg.tol = 1e-12;
        try {
            solve(op, 1e3, b, cfg);
            FAIL("expected ConvergenceError");
        } catch (const ConvergenceError& e) {
            CHECK(e.iterations() <= 2);
            CHECK(e.residual() > 1e-12);
        }
    }
}

TEST_CASE("rounding floor", "[solver]") {
    const auto g = make_grid(4, 4);
    const Image v = oracle::random_image(g, 1);
    const auto op = random_operator(g, 2, v);
    double cmax = 0.0;
    for (double c : op.band(StencilOperator::Band::Center)) cmax = std::max(cmax, -c);
    CHECK(residual_floor(op, 10.0) == std::numeric_limits<double>::epsilon() * (1.0 + 20.0 * cmax));
    SolverConfig cfg;
    cfg.tol = 1e-30;
    const auto r = solve(op, 1e6, oracle::random_image(g, 3), cfg);
    CHECK(r.floor_limited);
    CHECK(r.residual <= residual_floor(op, 1e6));
}
