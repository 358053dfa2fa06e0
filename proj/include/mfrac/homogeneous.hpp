#pragma once

// Homogeneous sequential M-fractional equations with constant coefficients:
// characteristic polynomial, fundamental solution set (repeated and complex
// roots), M-Wronskian, Abel-type Wronskian formula, and IVP constants.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfrac/mexpr.hpp"
#include "mfrac/numerics.hpp"

namespace mfrac {

struct InitialData {
    double t0 = 1.0;
    std::vector<double> values; // y(t0), D y(t0), ..., D^(n-1) y(t0)
};

class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Constant-coefficient problem
//   nD y + p_{n-1} (n-1)D y + ... + p_1 D y + p_0 y = f(t),
// with D the M-derivative of order (alpha, beta). Leading coefficient 1 is
// implied; p holds p_0..p_{n-1}.
struct ProblemSpec {
    double alpha = 1.0;
    double beta = 1.0;
    std::vector<double> p;
    std::optional<MExpr> forcing;
    std::optional<InitialData> initial;
    std::optional<double> lower_limit;
    QuadConfig quad;

    int order() const { return static_cast<int>(p.size()); }

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw validation_error("alpha must be in (0,1]");
        if (!(beta > 0.0)) throw validation_error("beta must be > 0");
        if (p.empty()) throw validation_error("coefficients must be non-empty");
        if (p.size() > 16) throw validation_error("order > 16 unsupported");
        for (double c : p) {
            if (!std::isfinite(c)) throw validation_error("coefficients must be finite");
        }
        if (initial) {
            if (!(initial->t0 > 0.0)) throw validation_error("initial t0 must be > 0");
            if (initial->values.size() != p.size()) {
                throw validation_error("initial values must match the equation order");
            }
            for (double v : initial->values) {
                if (!std::isfinite(v)) throw validation_error("initial values must be finite");
            }
        }
        if (lower_limit) {
            if (!(*lower_limit > 0.0)) throw validation_error("lower_limit must be > 0");
            if (initial && !(*lower_limit <= initial->t0)) {
                throw validation_error("lower_limit must not exceed t0");
            }
        }
        if (!(quad.abs_tol > 0.0) || !(quad.rel_tol > 0.0) || quad.max_depth < 10) {
            throw validation_error("quad config requires abs_tol > 0, rel_tol > 0, max_depth >= 10");
        }
    }
};

// P_n(r) = r^n + p_{n-1} r^(n-1) + ... + p_0 as ascending coefficients.
inline PolyCoeffs characteristic_poly(const ProblemSpec& spec) {
    spec.validate();
    std::vector<double> coeffs = spec.p;
    coeffs.push_back(1.0);
    return PolyCoeffs(std::move(coeffs));
}

// Fundamental set of n real-valued solutions together with the symbolic
// M-derivative chains of every basis function up to order n.
struct FundamentalSet {
    std::vector<MPolyExp> basis;
    double alpha = 1.0;
    double beta = 1.0;
    // chains[k][j] = k-th M-derivative of basis j, k = 0..n.
    std::vector<std::vector<MPolyExp>> chains;

    int order() const { return static_cast<int>(basis.size()); }

    double eval_basis(int j, double t) const { return basis[static_cast<size_t>(j)].eval_real(alpha, beta, t); }

    double eval_derivative(int k, int j, double t) const {
        return chains[static_cast<size_t>(k)][static_cast<size_t>(j)].eval_real(alpha, beta, t);
    }
};

// Basis ordering is fixed so IVP constants are reproducible: real roots
// ascending, then conjugate pairs ascending in (a, b); within a root the
// power l ascends, and a pair contributes its cos form before its sin form.
inline FundamentalSet fundamental_set(const RootSet& roots, double alpha, double beta) {
    FundamentalSet fs;
    fs.alpha = alpha;
    fs.beta = beta;
    for (const RealRoot& rr : roots.real_roots) {
        for (int l = 0; l < rr.multiplicity; ++l) {
            fs.basis.push_back(MPolyExp(MTerm{Complex(1.0, 0.0), l, Complex(rr.r, 0.0)}));
        }
    }
    for (const ComplexPair& cp : roots.complex_pairs) {
        for (int l = 0; l < cp.multiplicity; ++l) {
            const MTerm up{Complex(1.0, 0.0), l, Complex(cp.re, cp.im)};
            const MTerm down{Complex(1.0, 0.0), l, Complex(cp.re, -cp.im)};
            RealFormPair pair = real_form(up, down);
            fs.basis.push_back(std::move(pair.cos_form));
            fs.basis.push_back(std::move(pair.sin_form));
        }
    }

    const int n = fs.order();
    fs.chains.resize(static_cast<size_t>(n) + 1);
    fs.chains[0] = fs.basis;
    for (int k = 1; k <= n; ++k) {
        fs.chains[static_cast<size_t>(k)].reserve(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) {
            fs.chains[static_cast<size_t>(k)].push_back(m_derivative(fs.chains[static_cast<size_t>(k) - 1][static_cast<size_t>(j)]));
        }
    }
    return fs;
}

// Entry (i, j) = i-th M-derivative of basis j at t, evaluated from the
// symbolic chains.
inline Mat wronskian_matrix(const FundamentalSet& fs, double t) {
    if (!(t > 0.0)) throw std::domain_error("wronskian_matrix: t must be > 0");
    const int n = fs.order();
    Mat w(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) w(i, j) = fs.eval_derivative(i, j, t);
    }
    return w;
}

inline double wronskian_det(const FundamentalSet& fs, double t) {
    return LuFactor::decompose(wronskian_matrix(fs, t)).det();
}

// Abel-type closed form for a constant top coefficient p_{n-1}:
//   W(t) = W(t0) * exp(-p_top * Gamma(beta+1) * (t^alpha - t0^alpha) / alpha).
inline double abel_wronskian(double w0, double t0, double t, double p_top, double alpha, double beta) {
    if (!(t0 > 0.0) || !(t > 0.0)) throw std::domain_error("abel_wronskian: t, t0 must be > 0");
    const double g = gamma(beta + 1.0);
    return w0 * std::exp(-p_top * g * (std::pow(t, alpha) - std::pow(t0, alpha)) / alpha);
}

class singular_wronskian_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Each Wronskian column carries one exponential mode, so column magnitudes
// can differ by many orders without the system being singular. Equilibrate
// columns to unit max before the LU solve and unscale the solution.
inline std::vector<double> solve_wronskian_system(const Mat& w, const std::vector<double>& rhs) {
    const int n = w.rows();
    Mat scaled = w;
    std::vector<double> col_scale(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col_scale[static_cast<size_t>(j)] = std::max(col_scale[static_cast<size_t>(j)], std::abs(w(i, j)));
        if (col_scale[static_cast<size_t>(j)] == 0.0) {
            throw singular_wronskian_error("wronskian system: zero basis column");
        }
        for (int i = 0; i < n; ++i) scaled(i, j) = w(i, j) / col_scale[static_cast<size_t>(j)];
    }
    std::vector<double> x = [&] {
        try {
            return LuFactor::decompose(scaled).solve(rhs);
        } catch (const singular_matrix_error&) {
            throw singular_wronskian_error("wronskian system: numerically singular");
        }
    }();
    for (int j = 0; j < n; ++j) x[static_cast<size_t>(j)] /= col_scale[static_cast<size_t>(j)];
    return x;
}

} // namespace detail

// Constants c with W(t0) c = y_init. Verifies the reconstruction against all
// n initial conditions to 1e-10 absolute (scaled).
inline std::vector<double> solve_ivp(const FundamentalSet& fs, double t0, const std::vector<double>& y_init) {
    const int n = fs.order();
    if (static_cast<int>(y_init.size()) != n) throw std::invalid_argument("solve_ivp: initial data size mismatch");
    const Mat w = wronskian_matrix(fs, t0);
    std::vector<double> c = detail::solve_wronskian_system(w, y_init);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += w(i, j) * c[static_cast<size_t>(j)];
        const double scale = 1.0 + std::abs(y_init[static_cast<size_t>(i)]);
        if (!(std::abs(acc - y_init[static_cast<size_t>(i)]) <= 1e-10 * scale)) {
            throw singular_wronskian_error("solve_ivp: reconstruction failed the 1e-10 check (ill-conditioned Wronskian)");
        }
    }
    return c;
}

} // namespace mfrac
