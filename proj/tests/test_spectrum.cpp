#include "osmosis/spectrum.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace osmosis;
using Catch::Approx;

namespace {

StencilOperator operator_for(const GridSpec& g, std::uint64_t seed, Image& v_out) {
    v_out = oracle::random_image(g, seed);
    const Image u = oracle::random_image(g, seed + 1);
    return assemble(pointwise_g(u, v_out, {}), canonical_drift(v_out), g);
}

}  // namespace

TEST_CASE("semi-implicit spectrum on 3x3 and 4x4", "[spectrum]") {
    for (std::size_t n : {3u, 4u}) {
        Image v;
        const auto op = operator_for(make_grid(n, n), 10 + n, v);
        const auto r = dense_spectrum(op, 1e3, Scheme::SemiImplicit, &v);
        CHECK(r.unit_eigenvalues == 1);
        CHECK(r.max_other_modulus < 1.0);
        CHECK(r.eigenvector_positive);
        CHECK(r.cosine_with_reference >= 1.0 - 1e-10);
        CHECK(r.nonnegative());
        CHECK(r.max_column_sum_error <= 1e-10);
        CHECK(r.stable());
        CHECK(std::abs(r.eigenvalues.front() - 1.0) <= 1e-10);
    }
}

TEST_CASE("power iteration agrees with the reference direction", "[spectrum]") {
    Image v;
    const auto op = operator_for(make_grid(4, 4), 3, v);
    const Eigen::MatrixXd p = iteration_matrix(op, 1e3, Scheme::SemiImplicit);
    const Eigen::VectorXd w = oracle::power_iteration(p);
    const Eigen::VectorXd ve = oracle::to_eigen(v);
    CHECK(std::abs(w.dot(ve)) / ve.norm() == Approx(1.0).epsilon(1e-10));
    CHECK((p * ve - ve).norm() <= 1e-10 * ve.norm());
}

TEST_CASE("explicit spectrum at and beyond the bound", "[spectrum]") {
    Image v;
    const auto op = operator_for(make_grid(3, 3), 21, v);
    const double bound = explicit_stability_bound(op);

    const auto at = dense_spectrum(op, bound, Scheme::Explicit, &v);
    CHECK(at.unit_eigenvalues == 1);
    CHECK(at.max_other_modulus <= 1.0 + 1e-12);
    CHECK(at.nonnegative());

    const auto beyond = dense_spectrum(op, 4.0 * bound, Scheme::Explicit, &v);
    CHECK_FALSE(beyond.nonnegative());
    CHECK_FALSE(beyond.stable());
}

TEST_CASE("dense P reproduces a semi-implicit step", "[spectrum]") {
    const auto g = make_grid(4, 4);
    Image v;
    const auto op = operator_for(g, 31, v);
    const Image u = oracle::random_image(g, 32);
    SolverConfig cfg;
    cfg.tol = 1e-14;
    const auto step = semi_implicit_step(u, op, 10.0, cfg);
    const Eigen::VectorXd pu = iteration_matrix(op, 10.0, Scheme::SemiImplicit) * oracle::to_eigen(u);
    std::vector<double> expect(pu.data(), pu.data() + pu.size());
    CHECK(oracle::rel_diff(step.u.vector(), expect) <= 1e-10);
}

TEST_CASE("dense spectrum size guard", "[spectrum]") {
    Image v;
    const auto op = operator_for(make_grid(9, 8), 1, v);
    CHECK_THROWS_AS(dense_spectrum(op, 1.0, Scheme::SemiImplicit), ArgumentError);
    CHECK(densify(operator_for(make_grid(2, 3), 2, v)).rows() == 6);
}
