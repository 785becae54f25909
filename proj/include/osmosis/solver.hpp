#pragma once

#include "osmosis/error.hpp"
#include "osmosis/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace osmosis {

enum class SolverMethod { Sor, GaussSeidel, StabilizedKrylov };

inline std::string_view to_string(SolverMethod m) noexcept {
    switch (m) {
        case SolverMethod::Sor: return "sor";
        case SolverMethod::GaussSeidel: return "gauss-seidel";
        case SolverMethod::StabilizedKrylov: return "stabilized-krylov";
    }
    return "?";
}

inline SolverMethod parse_solver_method(std::string_view s) {
    if (s == "sor") return SolverMethod::Sor;
    if (s == "gauss-seidel" || s == "gs") return SolverMethod::GaussSeidel;
    if (s == "stabilized-krylov" || s == "bicgstab") return SolverMethod::StabilizedKrylov;
    throw ArgumentError("unknown solver method '" + std::string(s) + "'");
}

struct SolverConfig {
    SolverMethod method = SolverMethod::StabilizedKrylov;
    double omega = 1.5;
    double tol = 1e-9;
    std::size_t max_inner_iters = 0;  // 0 selects 10 * N

    void validate() const {
        if (!(omega > 0.0 && omega < 2.0)) throw ArgumentError("relaxation omega must lie in (0, 2)");
        if (!(tol > 0.0)) throw ArgumentError("solver tolerance must be > 0");
    }
    std::size_t iteration_limit(std::size_t n) const noexcept {
        return max_inner_iters ? max_inner_iters : 10 * n;
    }
};

struct SolveResult {
    Image x;
    std::size_t iterations = 0;
    double residual = 0.0;  // true relative residual ||(I - tau A) x - b|| / ||b||
    SolverMethod method_used = SolverMethod::Sor;
    bool fell_back = false;  // SOR diverged and Gauss-Seidel took over
    bool floor_limited = false;  // tolerance was raised to the rounding floor
};

/// Relative residual level attainable in double precision for (I - tau A):
/// eps (1 + 2 tau max|a_ii|).
inline double residual_floor(const StencilOperator& op, double tau) {
    double cmax = 0.0;
    for (double c : op.band(StencilOperator::Band::Center)) cmax = std::max(cmax, std::abs(c));
    return std::numeric_limits<double>::epsilon() * (1.0 + 2.0 * tau * cmax);
}

namespace detail {

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

/// y = (I - tau A) x
inline void system_apply(const StencilOperator& op, double tau, std::span<const double> x,
                         std::span<double> y) {
    apply(op, x, y);
    for (std::size_t p = 0; p < x.size(); ++p) y[p] = x[p] - tau * y[p];
}

/// r = b - (I - tau A) x, returns ||r||_2.
inline double system_residual(const StencilOperator& op, double tau, std::span<const double> x,
                              std::span<const double> b, std::span<double> r) {
    system_apply(op, tau, x, r);
    double s = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) {
        r[p] = b[p] - r[p];
        s += r[p] * r[p];
    }
    return std::sqrt(s);
}

/// One forward (row-major) relaxation sweep on (I - tau A) x = b.
inline void relaxation_sweep(const StencilOperator& op, double tau, double omega,
                             std::span<const double> b, std::span<double> x) {
    const GridSpec& g = op.grid();
    const std::size_t rows = g.rows, cols = g.cols;
    const auto c = op.band(StencilOperator::Band::Center);
    const auto n = op.band(StencilOperator::Band::North);
    const auto s = op.band(StencilOperator::Band::South);
    const auto e = op.band(StencilOperator::Band::East);
    const auto w = op.band(StencilOperator::Band::West);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t p = i * cols + j;
            double sigma = 0.0;
            if (i + 1 < rows) sigma += n[p] * x[p + cols];
            if (i > 0) sigma += s[p] * x[p - cols];
            if (j + 1 < cols) sigma += e[p] * x[p + 1];
            if (j > 0) sigma += w[p] * x[p - 1];
            const double gs = (b[p] + tau * sigma) / (1.0 - tau * c[p]);
            x[p] = (1.0 - omega) * x[p] + omega * gs;
        }
    }
}

struct RelaxationOutcome {
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool diverged = false;
};

inline RelaxationOutcome relax(const StencilOperator& op, double tau, double omega,
                               std::span<const double> b, std::span<double> x, double tol_abs,
                               std::size_t max_iters, bool detect_divergence) {
    std::vector<double> r(b.size());
    RelaxationOutcome out;
    out.residual = system_residual(op, tau, x, b, r);
    if (out.residual <= tol_abs) {
        out.converged = true;
        return out;
    }
    double previous = out.residual;
    std::size_t rising = 0;
    while (out.iterations < max_iters) {
        relaxation_sweep(op, tau, omega, b, x);
        ++out.iterations;
        out.residual = system_residual(op, tau, x, b, r);
        if (out.residual <= tol_abs) {
            out.converged = true;
            return out;
        }
        if (!std::isfinite(out.residual)) {
            out.diverged = true;
            return out;
        }
        rising = out.residual > previous ? rising + 1 : 0;
        previous = out.residual;
        if (detect_divergence && rising >= 10) {
            out.diverged = true;
            return out;
        }
    }
    return out;
}

/// Incomplete LU with zero fill for the five-point pattern of I - tau A.
class Ilu0 {
public:
    Ilu0(const StencilOperator& op, double tau)
        : op_(op), tau_(tau), pivot_(op.size()), lower_w_(op.size(), 0.0), lower_s_(op.size(), 0.0) {
        const GridSpec& g = op.grid();
        const std::size_t cols = g.cols;
        for (std::size_t p = 0; p < g.size(); ++p) {
            const std::size_t i = g.row_of(p), j = g.col_of(p);
            double d = 1.0 - tau * op.center(p);
            if (j > 0) {
                const double m_pw = -tau * op.coefficient(p, Direction::West);
                const double m_wp = -tau * op.coefficient(p - 1, Direction::East);
                lower_w_[p] = m_pw / pivot_[p - 1];
                d -= lower_w_[p] * m_wp;
            }
            if (i > 0) {
                const double m_ps = -tau * op.coefficient(p, Direction::South);
                const double m_sp = -tau * op.coefficient(p - cols, Direction::North);
                lower_s_[p] = m_ps / pivot_[p - cols];
                d -= lower_s_[p] * m_sp;
            }
            pivot_[p] = d;
        }
    }

    /// z = (LU)^{-1} r
    void solve(std::span<const double> r, std::span<double> z) const {
        const GridSpec& g = op_.grid();
        const std::size_t n = g.size(), cols = g.cols;
        for (std::size_t p = 0; p < n; ++p) {
            double y = r[p];
            if (g.col_of(p) > 0) y -= lower_w_[p] * z[p - 1];
            if (p >= cols) y -= lower_s_[p] * z[p - cols];
            z[p] = y;
        }
        for (std::size_t k = n; k-- > 0;) {
            double y = z[k];
            if (g.col_of(k) + 1 < cols) y += tau_ * op_.coefficient(k, Direction::East) * z[k + 1];
            if (k + cols < n) y += tau_ * op_.coefficient(k, Direction::North) * z[k + cols];
            z[k] = y / pivot_[k];
        }
    }

private:
    const StencilOperator& op_;
    double tau_;
    std::vector<double> pivot_;
    std::vector<double> lower_w_;
    std::vector<double> lower_s_;
};

/// Right-preconditioned BiCGSTAB with ILU(0); restarts on breakdown or recursion drift.
inline RelaxationOutcome bicgstab(const StencilOperator& op, double tau, std::span<const double> b,
                                  std::span<double> x, double tol_abs, std::size_t max_iters) {
    const std::size_t n = b.size();
    const Ilu0 precond(op, tau);
    std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), ph(n), s(n), sh(n), t(n);
    RelaxationOutcome out;
    out.residual = system_residual(op, tau, x, b, r);
    while (out.iterations < max_iters) {
        if (out.residual <= tol_abs) {
            out.converged = true;
            return out;
        }
        rhat = r;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        double rho = 1.0, alpha = 1.0, w = 1.0;
        bool restart = false;
        while (!restart && out.iterations < max_iters) {
            const double rho_new = dot(rhat, r);
            if (rho_new == 0.0 || !std::isfinite(rho_new)) break;
            const double beta = (rho_new / rho) * (alpha / w);
            rho = rho_new;
            for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - w * v[k]);
            precond.solve(p, ph);
            system_apply(op, tau, ph, v);
            const double denom = dot(rhat, v);
            if (denom == 0.0 || !std::isfinite(denom)) break;
            alpha = rho / denom;
            for (std::size_t k = 0; k < n; ++k) s[k] = r[k] - alpha * v[k];
            ++out.iterations;
            if (norm2(s) <= tol_abs) {
                for (std::size_t k = 0; k < n; ++k) x[k] += alpha * ph[k];
                restart = true;
                break;
            }
            precond.solve(s, sh);
            system_apply(op, tau, sh, t);
            const double tt = dot(t, t);
            if (tt == 0.0) {
                for (std::size_t k = 0; k < n; ++k) x[k] += alpha * ph[k];
                restart = true;
                break;
            }
            w = dot(t, s) / tt;
            for (std::size_t k = 0; k < n; ++k) {
                x[k] += alpha * ph[k] + w * sh[k];
                r[k] = s[k] - w * t[k];
            }
            if (norm2(r) <= tol_abs || w == 0.0) restart = true;
        }
        // The recursion residual can drift from the true one; always re-check.
        const double before = out.residual;
        out.residual = system_residual(op, tau, x, b, r);
        if (!std::isfinite(out.residual)) {
            out.diverged = true;
            return out;
        }
        if (!restart && out.residual >= before) break;  // breakdown without progress
    }
    out.converged = out.residual <= tol_abs;
    return out;
}

}  // namespace detail

/// Solves (I - tau A) x = b, warm-started from b. Throws ConvergenceError when the
/// iteration limit is reached without meeting ||r||_2 <= tol ||b||_2.
inline SolveResult solve(const StencilOperator& op, double tau, const Image& b,
                         const SolverConfig& cfg) {
    cfg.validate();
    require_same_grid(op.grid(), b.grid(), "solve right-hand side");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ArgumentError("tau must be finite and >= 0");
    for (double x : b.values())
        if (!std::isfinite(x)) throw ArgumentError("right-hand side must be finite");

    SolveResult res{b, 0, 0.0, cfg.method, false, false};
    const double bnorm = detail::norm2(b.values());
    if (tau == 0.0 || bnorm == 0.0) return res;
    // The residual of (I - tau A) x cannot be resolved below roughly eps * ||I - tau A|| * ||x||;
    // requests under that floor are clamped to it.
    const double floor_abs = residual_floor(op, tau) * bnorm;
    const double tol_abs = std::max(cfg.tol * bnorm, floor_abs);
    res.floor_limited = floor_abs > cfg.tol * bnorm;
    const std::size_t limit = cfg.iteration_limit(b.size());

    detail::RelaxationOutcome out;
    switch (cfg.method) {
        case SolverMethod::StabilizedKrylov:
            out = detail::bicgstab(op, tau, b.values(), res.x.values(), tol_abs, limit);
            break;
        case SolverMethod::GaussSeidel:
            out = detail::relax(op, tau, 1.0, b.values(), res.x.values(), tol_abs, limit, false);
            res.method_used = SolverMethod::GaussSeidel;
            break;
        case SolverMethod::Sor: {
            const bool gs = cfg.omega == 1.0;
            out = detail::relax(op, tau, cfg.omega, b.values(), res.x.values(), tol_abs, limit, !gs);
            if (out.diverged) {
                const std::size_t used = out.iterations;
                res.x = b;
                res.fell_back = true;
                res.method_used = SolverMethod::GaussSeidel;
                out = detail::relax(op, tau, 1.0, b.values(), res.x.values(), tol_abs,
                                    limit > used ? limit - used : 0, false);
                out.iterations += used;
            }
            break;
        }
    }
    res.iterations = out.iterations;
    res.residual = out.residual / bnorm;
    if (!out.converged) throw ConvergenceError(res.iterations, res.residual);
    return res;
}

}  // namespace osmosis
