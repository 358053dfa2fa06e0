#pragma once

// Fractional variation of parameters: solve the Wronskian system pointwise
// for the M-derivatives of the coefficient functions c_i, accumulate c_i with
// the M-integral, and expose the particular solution v(t) = sum c_i(t) y_i(t).

#include <memory>
#include <utility>
#include <vector>

#include "mfrac/homogeneous.hpp"
#include "mfrac/mexpr.hpp"
#include "mfrac/numerics.hpp"

namespace mfrac {

// Pointwise system solve: W(t) g = (0, ..., 0, f(t)), g_i = (D c_i)(t).
inline std::vector<double> vop_system_solve(const FundamentalSet& basis, double t, double f_value) {
    const int n = basis.order();
    const Mat w = wronskian_matrix(basis, t);
    std::vector<double> rhs(static_cast<size_t>(n), 0.0);
    rhs.back() = f_value;
    try {
        return detail::solve_wronskian_system(w, rhs);
    } catch (const singular_wronskian_error&) {
        throw singular_wronskian_error("vop_system_solve: Wronskian singular at t = " + std::to_string(t));
    }
}

struct CoefficientState {
    std::vector<double> c;
    double error_bound = 0.0;
    bool quad_exhausted = false; // partial result: some segment hit max depth
};

// Accumulates the VoP coefficients c_i(t) = Gamma(beta+1) Int_a^t g_i(x) x^(alpha-1) dx
// with c_i(a) = 0, caching monotone checkpoints so sweeps re-integrate only
// the last segment.
class VoPState {
public:
    VoPState(FundamentalSet basis, MExpr forcing, double lower_limit, QuadConfig quad)
        : basis_(std::move(basis)), forcing_(std::move(forcing)), a_(lower_limit), quad_(quad), max_t_(lower_limit) {
        if (!(a_ > 0.0)) throw std::invalid_argument("VoPState: lower limit must be > 0");
        checkpoints_.push_back({a_, std::vector<double>(static_cast<size_t>(basis_.order()), 0.0), 0.0});
    }

    const FundamentalSet& basis() const { return basis_; }
    const MExpr& forcing() const { return forcing_; }
    double lower_limit() const { return a_; }
    const QuadConfig& quad_config() const { return quad_; }
    double max_evaluated_t() const { return max_t_; }

    double forcing_at(double t) const { return eval_expr(forcing_, t); }

    std::vector<double> system_solve_at(double t) const { return vop_system_solve(basis_, t, forcing_at(t)); }

    // c(t) integrated from the nearest cached checkpoint at or below t.
    CoefficientState accumulate(double t) {
        if (!(t >= a_)) throw std::invalid_argument("VoPState::accumulate: requires t >= lower limit");
        size_t idx = 0;
        for (size_t i = 0; i < checkpoints_.size(); ++i) {
            if (checkpoints_[i].t <= t) idx = i;
        }
        const Checkpoint& base = checkpoints_[idx];
        CoefficientState state{base.c, base.error_bound, false};
        if (t > base.t) {
            const int n = basis_.order();
            for (int i = 0; i < n; ++i) {
                auto component = [this, i](double x) { return system_solve_at(x)[static_cast<size_t>(i)]; };
                const QuadResult q = m_integral(component, base.t, t, basis_.alpha, basis_.beta, quad_);
                state.c[static_cast<size_t>(i)] += q.value;
                state.error_bound += q.error_bound;
                state.quad_exhausted |= q.depth_exceeded;
            }
        }
        if (t >= checkpoints_.back().t + kCheckpointSpacing) {
            checkpoints_.push_back({t, state.c, state.error_bound});
        }
        max_t_ = std::max(max_t_, t);
        return state;
    }

    static constexpr double kCheckpointSpacing = 0.25;

private:
    struct Checkpoint {
        double t;
        std::vector<double> c;
        double error_bound;
    };

    FundamentalSet basis_;
    MExpr forcing_;
    double a_;
    QuadConfig quad_;
    std::vector<Checkpoint> checkpoints_; // strictly increasing in t
    double max_t_;
};

// Evaluatable particular solution v(t) = sum c_i(t) y_i(t) on [a, t_max].
// The VoP conditions make the first n-1 M-derivatives of v equal to
// sum c_i(t) (D^k y_i)(t); the n-th picks up the forcing term.
class ParticularSolution {
public:
    ParticularSolution(FundamentalSet basis, MExpr forcing, double lower_limit, QuadConfig quad)
        : state_(std::make_shared<VoPState>(std::move(basis), std::move(forcing), lower_limit, quad)) {}

    double lower_limit() const { return state_->lower_limit(); }
    double max_evaluated_t() const { return state_->max_evaluated_t(); }
    double error_bound() const { return last_error_bound_; }
    VoPState& state() { return *state_; }
    const FundamentalSet& basis() const { return state_->basis(); }

    double eval(double t) const { return m_derivative_at(t, 0); }

    // k-th M-derivative for k <= n-1 via the VoP conditions; k = n adds f(t).
    double m_derivative_at(double t, int k) const {
        const FundamentalSet& fs = state_->basis();
        const int n = fs.order();
        if (k < 0 || k > n) throw std::invalid_argument("ParticularSolution: derivative order out of range");
        const CoefficientState cs = state_->accumulate(t);
        last_error_bound_ = cs.error_bound;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += cs.c[static_cast<size_t>(j)] * fs.eval_derivative(k, j, t);
        if (k == n) acc += state_->forcing_at(t);
        return acc;
    }

    std::vector<double> coefficients_at(double t) const { return state_->accumulate(t).c; }

private:
    std::shared_ptr<VoPState> state_;
    mutable double last_error_bound_ = 0.0;
};

// Problem-level entry point: builds the fundamental set from the
// characteristic roots and wires the forcing through the VoP machinery. The
// lower limit defaults to t0 when initial data is present, else 0.5.
inline ParticularSolution particular_solution(const ProblemSpec& spec) {
    spec.validate();
    if (!spec.forcing) throw validation_error("particular_solution: forcing required");
    const RootSet roots = cluster_roots(poly_roots(characteristic_poly(spec)));
    FundamentalSet fs = fundamental_set(roots, spec.alpha, spec.beta);
    const double a = spec.lower_limit ? *spec.lower_limit : (spec.initial ? spec.initial->t0 : 0.5);
    return ParticularSolution(std::move(fs), *spec.forcing, a, spec.quad);
}

inline ParticularSolution particular_solution(const ProblemSpec& spec, const FundamentalSet& fs) {
    if (!spec.forcing) throw validation_error("particular_solution: forcing required");
    const double a = spec.lower_limit ? *spec.lower_limit : (spec.initial ? spec.initial->t0 : 0.5);
    return ParticularSolution(fs, *spec.forcing, a, spec.quad);
}

} // namespace mfrac
