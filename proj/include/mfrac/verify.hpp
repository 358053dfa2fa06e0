#pragma once

// Independent oracles: limit-definition and reduction-rule M-derivatives,
// equation residual reports (exact symbolic chains or nested finite
// differences), and a classical RK4 cross-integrator on the transformed
// first-order system.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "mfrac/homogeneous.hpp"
#include "mfrac/mexpr.hpp"
#include "mfrac/numerics.hpp"

namespace mfrac {

// Reduction rule for differentiable f: D f(t) = t^(1-alpha)/Gamma(beta+1) * f'(t),
// with f' by central difference, h = (1+|t|) * cbrt(machine epsilon).
template <class F>
double md_reduction_oracle(F&& f, double t, double alpha, double beta) {
    if (!(t > 0.0)) throw std::domain_error("md_reduction_oracle: t must be > 0");
    const double h = (1.0 + std::abs(t)) * std::cbrt(std::numeric_limits<double>::epsilon());
    const double diff = (f(t + h) - f(t - h)) / (2.0 * h);
    return std::pow(t, 1.0 - alpha) / gamma(beta + 1.0) * diff;
}

struct LimitOracleResult {
    double value = 0.0;
    bool diverged = false;
};

// Limit definition D f(t) = lim (f(t E_beta(eps t^-alpha)) - f(t)) / eps,
// Richardson-extrapolated over eps in {1e-4, 5e-5, 2.5e-5} * t^alpha.
template <class F>
LimitOracleResult md_limit_oracle(F&& f, double t, double alpha, double beta) {
    if (!(t > 0.0)) throw std::domain_error("md_limit_oracle: t must be > 0");
    const double t_pow = std::pow(t, alpha);
    const double f_t = f(t);
    const auto quotient = [&](double eps) {
        const MittagLefflerResult ml = mittag_leffler(beta, eps * std::pow(t, -alpha));
        return (f(t * ml.value) - f_t) / eps;
    };
    const double q1 = quotient(1e-4 * t_pow);
    const double q2 = quotient(5e-5 * t_pow);
    const double q3 = quotient(2.5e-5 * t_pow);
    const double r1 = 2.0 * q2 - q1;
    const double r2 = 2.0 * q3 - q2;
    const double value = (4.0 * r2 - r1) / 3.0;
    const double scale = 1.0 + std::abs(value);
    const bool diverged = std::abs(r2 - r1) > std::abs(r1 - q1) + 1e-6 * scale;
    return {value, diverged};
}

namespace detail {

// Nested reduction-rule derivatives for black-box residuals. Each nesting
// level differentiates an increasingly noisy function, so the steps follow
// the h ~ cbrt(noise) ladder; base_noise is the caller's relative accuracy
// of f itself (machine epsilon for exact evaluators, the quadrature
// tolerance for VoP-backed ones).
template <class F>
double nested_md_reduction(const F& f, double t, double alpha, double beta, int order, double base_noise) {
    if (order == 0) return f(t);
    double noise = base_noise;
    for (int k = 1; k < order; ++k) noise = std::pow(noise, 2.0 / 3.0);
    const double h = (1.0 + std::abs(t)) * std::cbrt(noise);
    const double left = nested_md_reduction(f, t - h, alpha, beta, order - 1, base_noise);
    const double right = nested_md_reduction(f, t + h, alpha, beta, order - 1, base_noise);
    return std::pow(t, 1.0 - alpha) / gamma(beta + 1.0) * (right - left) / (2.0 * h);
}

} // namespace detail

struct ResidualProbe {
    double t = 0.0;
    double residual = 0.0;
    double scale = 1.0;
};

struct ResidualReport {
    std::vector<ResidualProbe> probes;
    double max_relative = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    void finalize(double tol) {
        tolerance = tol;
        max_relative = 0.0;
        for (const ResidualProbe& p : probes) {
            max_relative = std::max(max_relative, std::abs(p.residual) / p.scale);
        }
        pass = max_relative <= tol;
    }
};

// Residual of the full equation for a symbolic candidate y: the M-derivative
// chains are exact, so this path resolves residuals down to root accuracy.
inline ResidualReport residual_symbolic(const ProblemSpec& spec, const MPolyExp& y,
                                        const std::vector<double>& probes, double tol = 1e-9) {
    spec.validate();
    if (probes.empty()) throw std::invalid_argument("residual: probe list must be non-empty");
    const int n = spec.order();
    std::vector<MPolyExp> chain(static_cast<size_t>(n) + 1);
    chain[0] = y;
    for (int k = 1; k <= n; ++k) chain[static_cast<size_t>(k)] = m_derivative(chain[static_cast<size_t>(k) - 1]);

    ResidualReport report;
    for (double t : probes) {
        double lhs = chain[static_cast<size_t>(n)].eval_real(spec.alpha, spec.beta, t);
        double max_term = std::abs(lhs);
        for (int k = 0; k < n; ++k) {
            const double term = spec.p[static_cast<size_t>(k)] * chain[static_cast<size_t>(k)].eval_real(spec.alpha, spec.beta, t);
            lhs += term;
            max_term = std::max(max_term, std::abs(term));
        }
        double rhs = 0.0;
        if (spec.forcing) {
            rhs = eval_expr(*spec.forcing, t);
            max_term = std::max(max_term, std::abs(rhs));
        }
        report.probes.push_back({t, lhs - rhs, 1.0 + max_term});
    }
    report.finalize(tol);
    return report;
}

// Residual for a black-box candidate via nested numeric M-derivatives.
// Noise amplification limits this to order n <= 3; accuracy degrades to
// roughly 1e-4 * scale at n = 3.
template <class F>
ResidualReport residual_blackbox(const ProblemSpec& spec, F&& y, const std::vector<double>& probes,
                                 double tol = 1e-4, double base_noise = std::numeric_limits<double>::epsilon()) {
    spec.validate();
    if (probes.empty()) throw std::invalid_argument("residual: probe list must be non-empty");
    const int n = spec.order();
    if (n > 3) throw std::invalid_argument("residual_blackbox: order > 3 requires a symbolic candidate");

    ResidualReport report;
    for (double t : probes) {
        double lhs = detail::nested_md_reduction(y, t, spec.alpha, spec.beta, n, base_noise);
        double max_term = std::abs(lhs);
        for (int k = 0; k < n; ++k) {
            const double term = spec.p[static_cast<size_t>(k)] *
                                detail::nested_md_reduction(y, t, spec.alpha, spec.beta, k, base_noise);
            lhs += term;
            max_term = std::max(max_term, std::abs(term));
        }
        double rhs = 0.0;
        if (spec.forcing) {
            rhs = eval_expr(*spec.forcing, t);
            max_term = std::max(max_term, std::abs(rhs));
        }
        report.probes.push_back({t, lhs - rhs, 1.0 + max_term});
    }
    report.finalize(tol);
    return report;
}

class step_overflow_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Rk4Sample {
    double t = 0.0;
    std::vector<double> state;
};

// Classical fixed-step RK4 on the transformed first-order system
//   X' = Gamma(beta+1) t^(alpha-1) (-P X + F(t)),
// with X = (y, D y, ..., D^(n-1) y) started from the initial data.
inline std::vector<Rk4Sample> rk4_cross_check(const ProblemSpec& spec, double t_end, int steps) {
    spec.validate();
    if (!spec.initial) throw validation_error("rk4_cross_check: initial data required");
    if (steps < 100) throw std::invalid_argument("rk4_cross_check: steps must be >= 100");
    const double t0 = spec.initial->t0;
    if (!(t_end > t0)) throw std::invalid_argument("rk4_cross_check: t_end must exceed t0");

    const int n = spec.order();
    const double g = gamma(spec.beta + 1.0);
    const auto rhs = [&](double t, const std::vector<double>& x) {
        const double w = g * std::pow(t, spec.alpha - 1.0);
        std::vector<double> dx(static_cast<size_t>(n), 0.0);
        for (int k = 0; k + 1 < n; ++k) dx[static_cast<size_t>(k)] = w * x[static_cast<size_t>(k) + 1];
        double top = spec.forcing ? eval_expr(*spec.forcing, t) : 0.0;
        for (int k = 0; k < n; ++k) top -= spec.p[static_cast<size_t>(k)] * x[static_cast<size_t>(k)];
        dx[static_cast<size_t>(n) - 1] = w * top;
        return dx;
    };

    std::vector<Rk4Sample> trajectory;
    trajectory.reserve(static_cast<size_t>(steps) + 1);
    std::vector<double> x = spec.initial->values;
    double t = t0;
    const double h = (t_end - t0) / steps;
    trajectory.push_back({t, x});
    std::vector<double> k1, k2, k3, k4, tmp(static_cast<size_t>(n));
    for (int step = 0; step < steps; ++step) {
        k1 = rhs(t, x);
        for (int i = 0; i < n; ++i) tmp[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + 0.5 * h * k1[static_cast<size_t>(i)];
        k2 = rhs(t + 0.5 * h, tmp);
        for (int i = 0; i < n; ++i) tmp[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + 0.5 * h * k2[static_cast<size_t>(i)];
        k3 = rhs(t + 0.5 * h, tmp);
        for (int i = 0; i < n; ++i) tmp[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + h * k3[static_cast<size_t>(i)];
        k4 = rhs(t + h, tmp);
        for (int i = 0; i < n; ++i) {
            x[static_cast<size_t>(i)] += h / 6.0 * (k1[static_cast<size_t>(i)] + 2.0 * k2[static_cast<size_t>(i)] +
                                                    2.0 * k3[static_cast<size_t>(i)] + k4[static_cast<size_t>(i)]);
            if (std::abs(x[static_cast<size_t>(i)]) > 1e12) {
                throw step_overflow_error("rk4_cross_check: state magnitude exceeded 1e12 at t = " + std::to_string(t));
            }
        }
        t = t0 + (step + 1) * h;
        trajectory.push_back({t, x});
    }
    return trajectory;
}

} // namespace mfrac
