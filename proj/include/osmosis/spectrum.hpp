#pragma once

// Dense spectral oracle for tiny grids. Backed by Eigen's general eigensolver.

#include "osmosis/stencil.hpp"
#include "osmosis/stepper.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace osmosis {

inline constexpr std::size_t kDenseSpectrumMaxPixels = 64;

inline Eigen::MatrixXd densify(const StencilOperator& op) {
    const std::size_t n = op.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < n; ++p) {
        a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) = op.center(p);
        for (Direction d : kDirections) {
            const auto q = neighbor(op.grid(), p, d);
            if (!q.boundary)
                a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q.index)) =
                    op.coefficient(p, d);
        }
    }
    return a;
}

/// Iteration matrix P: I + tau A (explicit) or (I - tau A)^{-1} (semi-implicit).
inline Eigen::MatrixXd iteration_matrix(const StencilOperator& op, double tau, Scheme scheme) {
    if (op.size() > kDenseSpectrumMaxPixels)
        throw ArgumentError("dense spectrum limited to " + std::to_string(kDenseSpectrumMaxPixels) +
                            " pixels");
    const Eigen::MatrixXd a = densify(op);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    if (scheme == Scheme::Explicit) return id + tau * a;
    return (id - tau * a).partialPivLu().inverse();
}

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;  // sorted by decreasing modulus
    std::size_t unit_eigenvalues = 0;                // |lambda - 1| <= unit_tol
    double unit_tol = 1e-10;
    double max_other_modulus = 0.0;  // largest |lambda| after removing the one closest to 1
    double min_entry = 0.0;          // smallest entry of P
    double max_column_sum_error = 0.0;
    bool eigenvector_positive = false;  // eigenvector of the eigenvalue closest to 1
    double cosine_with_reference = 0.0;

    bool unit_simple() const noexcept { return unit_eigenvalues == 1; }
    bool nonnegative() const noexcept { return min_entry >= 0.0; }
    /// Conditions under which the discrete process keeps mass, sign and converges.
    bool stable() const noexcept {
        return unit_simple() && nonnegative() && max_other_modulus < 1.0;
    }
};

inline SpectrumReport dense_spectrum(const StencilOperator& op, double tau, Scheme scheme,
                                     const Image* reference = nullptr, double unit_tol = 1e-10) {
    if (op.size() > kDenseSpectrumMaxPixels)
        throw ArgumentError("dense spectrum limited to " + std::to_string(kDenseSpectrumMaxPixels) +
                            " pixels");
    const Eigen::MatrixXd pm = iteration_matrix(op, tau, scheme);
    SpectrumReport r;
    r.unit_tol = unit_tol;
    r.min_entry = pm.minCoeff();
    r.max_column_sum_error = (pm.colwise().sum().array() - 1.0).abs().maxCoeff();

    Eigen::EigenSolver<Eigen::MatrixXd> es(pm, true);
    const auto& ev = es.eigenvalues();
    Eigen::Index closest = 0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        r.eigenvalues.push_back(ev(k));
        if (std::abs(ev(k) - 1.0) <= unit_tol) ++r.unit_eigenvalues;
        if (std::abs(ev(k) - 1.0) < std::abs(ev(closest) - 1.0)) closest = k;
    }
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (k != closest) r.max_other_modulus = std::max(r.max_other_modulus, std::abs(ev(k)));
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(),
              [](auto a, auto b) { return std::abs(a) > std::abs(b); });

    Eigen::VectorXd w = es.eigenvectors().col(closest).real();
    if (w.sum() < 0) w = -w;
    r.eigenvector_positive = w.minCoeff() > 0.0;
    if (reference) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(reference->size()));
        for (std::size_t p = 0; p < reference->size(); ++p) v(static_cast<Eigen::Index>(p)) = (*reference)[p];
        r.cosine_with_reference = w.dot(v) / (w.norm() * v.norm());
    }
    return r;
}

}  // namespace osmosis
