#pragma once

// Assembled solutions: general solution (fundamental set + optional IVP
// constants + optional particular solution), human-readable rendering in the
// u-variable, and the bundle-level residual report.

#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfrac/homogeneous.hpp"
#include "mfrac/mexpr.hpp"
#include "mfrac/nonhomog.hpp"
#include "mfrac/numerics.hpp"
#include "mfrac/verify.hpp"

namespace mfrac {

namespace detail {

// Display precision matches the root-finder's accuracy contract; CSV output
// keeps the full 17 digits instead.
inline std::string compact_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// "c3*u^2" style factor, omitting unit coefficients and zero powers.
inline std::string constant_poly(int first_index, int count) {
    std::string s;
    for (int l = 0; l < count; ++l) {
        if (l > 0) s += " + ";
        s += "c" + std::to_string(first_index + l);
        if (l == 1) s += "*u";
        if (l > 1) s += "*u^" + std::to_string(l);
    }
    if (count > 1) return "(" + s + ")";
    return s;
}

inline std::string exp_factor(double rate) {
    const std::string s = compact_number(rate);
    if (s == "0" || s == "-0") return {};
    if (s == "1") return "exp(u)";
    if (s == "-1") return "exp(-u)";
    return "exp(" + s + "*u)";
}

inline std::string trig_arg(double b) {
    const std::string s = compact_number(b);
    return s == "1" ? "u" : s + "*u";
}

} // namespace detail

// Symbolic rendering of the homogeneous family, e.g.
//   "c1*exp(-3*u) + c2*exp(-u)" or "(c1 + c2*u)*exp(2*u)".
inline std::string render_general_solution(const RootSet& roots) {
    std::vector<std::string> groups;
    int next_constant = 1;
    for (const RealRoot& rr : roots.real_roots) {
        const std::string poly = detail::constant_poly(next_constant, rr.multiplicity);
        next_constant += rr.multiplicity;
        const std::string ef = detail::exp_factor(rr.r);
        groups.push_back(ef.empty() ? poly : poly + "*" + ef);
    }
    for (const ComplexPair& cp : roots.complex_pairs) {
        std::string cos_poly = detail::constant_poly(next_constant, cp.multiplicity);
        next_constant += cp.multiplicity;
        std::string sin_poly = detail::constant_poly(next_constant, cp.multiplicity);
        next_constant += cp.multiplicity;
        std::string body = cos_poly + "*cos(" + detail::trig_arg(cp.im) + ") + " + sin_poly + "*sin(" + detail::trig_arg(cp.im) + ")";
        const std::string ef = detail::exp_factor(cp.re);
        groups.push_back(ef.empty() ? "(" + body + ")" : ef + "*(" + body + ")");
    }
    std::string out;
    for (size_t i = 0; i < groups.size(); ++i) {
        if (i > 0) out += " + ";
        out += groups[i];
    }
    return out;
}

inline std::string render_u_legend(double alpha, double beta) {
    const double factor = gamma(beta + 1.0) / alpha;
    std::string s = "u = ";
    if (factor != 1.0) s += detail::compact_number(factor) + "*";
    s += "t";
    if (alpha != 1.0) s += "^" + detail::compact_number(alpha);
    return s;
}

// Everything the solver produces for one problem. Constants are present when
// initial data was given; the particular evaluator when a forcing was given.
struct SolutionBundle {
    ProblemSpec spec;
    PolyCoeffs charpoly;
    RootSet roots;
    FundamentalSet fs;
    std::optional<std::vector<double>> constants;
    std::optional<ParticularSolution> particular;
    std::string rendering;
    std::string u_legend;

    bool unique() const { return constants.has_value(); }

    // y(t); requires constants (IVP data) so the member is unique.
    double eval(double t) const { return eval_mderiv(t, 0); }

    // k-th M-derivative of the assembled solution, k = 0..n-1.
    double eval_mderiv(double t, int k) const {
        if (!constants) throw validation_error("solution is a family: initial data required for evaluation");
        const int n = fs.order();
        if (k < 0 || k >= n) throw std::invalid_argument("eval_mderiv: order out of range");
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += (*constants)[static_cast<size_t>(j)] * fs.eval_derivative(k, j, t);
        if (particular) acc += particular->m_derivative_at(t, k);
        return acc;
    }

    // Residual of the assembled solution. The homogeneous part uses the exact
    // symbolic chains; the particular part uses the VoP identities, under
    // which the only non-symbolic contribution is the solved system's own
    // residual. Quadrature accuracy is checked separately (finite-difference
    // inverse identity, RK4 cross-check, pinned values).
    ResidualReport residual_report(const std::vector<double>& probes, double tol = 1e-6) const {
        const int n = fs.order();
        ResidualReport report;
        for (double t : probes) {
            double lhs = 0.0;
            double max_term = 0.0;
            for (int k = 0; k <= n; ++k) {
                const double pk = k == n ? 1.0 : spec.p[static_cast<size_t>(k)];
                double dk = 0.0;
                if (constants) {
                    for (int j = 0; j < n; ++j) dk += (*constants)[static_cast<size_t>(j)] * fs.eval_derivative(k, j, t);
                }
                if (particular) dk += particular->m_derivative_at(t, k);
                const double term = pk * dk;
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
};

// Full pipeline: characteristic polynomial -> roots -> clustered root set ->
// fundamental set, then IVP constants and/or the particular solution when
// the problem carries data for them. Constants are solved from the initial
// data minus the particular solution's contributions at t0.
inline SolutionBundle general_solution(const ProblemSpec& spec) {
    spec.validate();
    SolutionBundle bundle{spec, characteristic_poly(spec), {}, {}, std::nullopt, std::nullopt, {}, {}};
    bundle.roots = cluster_roots(poly_roots(bundle.charpoly));
    bundle.fs = fundamental_set(bundle.roots, spec.alpha, spec.beta);
    bundle.rendering = render_general_solution(bundle.roots);
    bundle.u_legend = render_u_legend(spec.alpha, spec.beta);

    if (spec.forcing) {
        bundle.particular = particular_solution(spec, bundle.fs);
        bundle.rendering += " + v(t)";
    }
    if (spec.initial) {
        const int n = spec.order();
        std::vector<double> target = spec.initial->values;
        if (bundle.particular) {
            for (int k = 0; k < n; ++k) {
                target[static_cast<size_t>(k)] -= bundle.particular->m_derivative_at(spec.initial->t0, k);
            }
        }
        bundle.constants = solve_ivp(bundle.fs, spec.initial->t0, target);
    }
    return bundle;
}

// Non-homogeneous initial value problem; both forcing and initial data must
// be present.
inline SolutionBundle full_solution(const ProblemSpec& spec) {
    spec.validate();
    if (!spec.forcing) throw validation_error("full_solution: forcing required");
    if (!spec.initial) throw validation_error("full_solution: initial data required");
    return general_solution(spec);
}

} // namespace mfrac
