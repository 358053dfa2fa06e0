#pragma once

// Core numeric kernels shared by every other header: gamma / Mittag-Leffler
// special functions, monic polynomial root finding with multiplicity
// clustering, dense LU solving, and adaptive Gauss-Kronrod quadrature.
// Everything in this header is pure and reentrant.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfrac {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

class singular_matrix_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class root_iteration_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class evaluation_overflow_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ gamma

namespace detail {

// Lanczos g=7, n=9 coefficient set; ~1e-13 relative on the positive axis.
inline constexpr double kLanczosG = 7.0;
inline constexpr double kLanczosCoeff[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

} // namespace detail

// log(Gamma(x)) for x > 0. Valid for arbitrarily large x (no overflow).
inline double lgamma_pos(double x) {
    if (!(x > 0.0)) throw std::domain_error("lgamma_pos: argument must be > 0");
    if (x < 0.5) {
        // Reflection: Gamma(x)Gamma(1-x) = pi / sin(pi x); sin is positive here.
        return std::log(kPi / std::sin(kPi * x)) - lgamma_pos(1.0 - x);
    }
    const double z = x - 1.0;
    double acc = detail::kLanczosCoeff[0];
    for (int i = 1; i < 9; ++i) acc += detail::kLanczosCoeff[i] / (z + i);
    const double t = z + detail::kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(acc);
}

// Gamma(x) for x > 0. Callers stay within (0, 50]; beta > 0 in this library
// guarantees arguments > 1 wherever Gamma(beta+1) appears.
inline double gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("gamma: argument must be > 0");
    return std::exp(lgamma_pos(x));
}

// ------------------------------------------------------- Mittag-Leffler

struct MittagLefflerResult {
    double value = 0.0;
    bool converged = true;
};

// One-parameter Mittag-Leffler function E_beta(z) = sum z^k / Gamma(beta k + 1),
// truncated when |term| < 1e-18 or after 300 terms. The convergence flag drops
// when 300 terms are reached with |term| still >= 1e-12.
//
// Integer beta uses an exact rational term recurrence in long double so that
// alternating sums (E_1(-5) has condition number ~4e3) stay at machine
// accuracy; general beta goes through lgamma_pos.
inline MittagLefflerResult mittag_leffler(double beta, double z) {
    if (!(beta > 0.0)) throw std::domain_error("mittag_leffler: beta must be > 0");

    constexpr int kMaxTerms = 300;
    constexpr double kTermCutoff = 1e-18;
    constexpr double kConvergedCutoff = 1e-12;

    const double beta_round = std::round(beta);
    const bool integer_beta = beta_round >= 1.0 && std::abs(beta - beta_round) < 1e-12;

    if (integer_beta) {
        const long m = static_cast<long>(beta_round);
        long double sum = 0.0L, term = 1.0L;
        double last = 1.0;
        for (int k = 0; k <= kMaxTerms; ++k) {
            sum += term;
            last = static_cast<double>(term >= 0 ? term : -term);
            if (last < kTermCutoff) return {static_cast<double>(sum), true};
            term *= static_cast<long double>(z);
            for (long j = 1; j <= m; ++j) term /= static_cast<long double>(m * k + j);
        }
        return {static_cast<double>(sum), last < kConvergedCutoff};
    }

    double sum = 1.0; // k = 0 term
    if (z == 0.0) return {1.0, true};
    const double ln_abs_z = std::log(std::abs(z));
    double last = 1.0;
    for (int k = 1; k <= kMaxTerms; ++k) {
        double term = std::exp(k * ln_abs_z - lgamma_pos(beta * k + 1.0));
        if (z < 0.0 && (k & 1)) term = -term;
        sum += term;
        last = std::abs(term);
        if (last < kTermCutoff) return {sum, true};
    }
    return {sum, last < kConvergedCutoff};
}

// ------------------------------------------------------ polynomial roots

// Monic polynomial, coefficients in ascending degree; coeffs.back() == 1.
struct PolyCoeffs {
    std::vector<double> coeffs;

    PolyCoeffs() = default;
    explicit PolyCoeffs(std::vector<double> c) : coeffs(std::move(c)) {
        if (coeffs.size() < 2) throw std::invalid_argument("PolyCoeffs: degree must be >= 1");
        if (coeffs.back() != 1.0) throw std::invalid_argument("PolyCoeffs: polynomial must be monic");
    }

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    Complex eval(Complex z) const {
        Complex acc = coeffs.back();
        for (int i = degree() - 1; i >= 0; --i) acc = acc * z + coeffs[static_cast<size_t>(i)];
        return acc;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (double c : coeffs) m = std::max(m, std::abs(c));
        return m;
    }
};

// All roots (with repetition) by the Weierstrass / Durand-Kerner simultaneous
// iteration. Multiple roots stall at a cluster of width ~sqrt(eps), which the
// downstream clustering collapses; the cluster mean is accurate to ~eps
// because the iteration preserves the first Newton identity.
inline std::vector<Complex> poly_roots(const PolyCoeffs& p) {
    const int n = p.degree();
    if (n < 1) throw std::invalid_argument("poly_roots: degree must be >= 1");
    if (n > 16) throw std::invalid_argument("poly_roots: degree > 16 unsupported");
    if (n == 1) return {Complex(-p.coeffs[0], 0.0)};

    double coeff_scale = 0.0;
    for (int i = 0; i < n; ++i) coeff_scale = std::max(coeff_scale, std::abs(p.coeffs[static_cast<size_t>(i)]));
    const double radius = 1.0 + coeff_scale;            // Cauchy bound for a monic polynomial
    const double residual_tol = 1e-8 * std::max(1.0, p.max_abs_coeff());

    for (int attempt = 0; attempt < 3; ++attempt) {
        // Non-real, non-symmetric starting points; rotated between attempts.
        const Complex seed = Complex(0.4, 0.9) * std::exp(Complex(0.0, 0.37 * attempt));
        std::vector<Complex> z(static_cast<size_t>(n));
        Complex acc = seed;
        for (int k = 0; k < n; ++k) {
            z[static_cast<size_t>(k)] = radius * acc;
            acc *= seed;
        }

        // Multiple roots stall at a cluster of width ~sqrt(eps); once the step
        // size stops shrinking the iteration only jitters, so stop there.
        double best_step = std::numeric_limits<double>::max();
        int stalled = 0;
        for (int iter = 0; iter < 500; ++iter) {
            double max_step = 0.0;
            for (int k = 0; k < n; ++k) {
                Complex denom = 1.0;
                for (int j = 0; j < n; ++j) {
                    if (j == k) continue;
                    denom *= z[static_cast<size_t>(k)] - z[static_cast<size_t>(j)];
                }
                if (denom == Complex(0.0, 0.0)) {
                    z[static_cast<size_t>(k)] += radius * 1e-8 * Complex(1.0, 1.0);
                    continue;
                }
                const Complex w = p.eval(z[static_cast<size_t>(k)]) / denom;
                z[static_cast<size_t>(k)] -= w;
                max_step = std::max(max_step, std::abs(w));
            }
            if (max_step <= 1e-15 * radius) break;
            if (max_step < 0.5 * best_step) {
                best_step = max_step;
                stalled = 0;
            } else if (++stalled >= 12) {
                break;
            }
        }

        bool ok = true;
        for (const Complex& r : z) {
            if (!(std::abs(p.eval(r)) <= residual_tol) || !std::isfinite(r.real()) || !std::isfinite(r.imag())) {
                ok = false;
                break;
            }
        }
        if (ok) return z;
    }
    throw root_iteration_error("poly_roots: iteration failed to meet the residual bound after restarts");
}

// ------------------------------------------------------- root clustering

struct RealRoot {
    double r = 0.0;
    int multiplicity = 1;
};

// Conjugate pair a +/- i b with b > 0.
struct ComplexPair {
    double re = 0.0;
    double im = 0.0;
    int multiplicity = 1;
};

struct RootSet {
    std::vector<RealRoot> real_roots;       // ascending in r
    std::vector<ComplexPair> complex_pairs; // ascending in (re, im)

    int order() const {
        int n = 0;
        for (const auto& rr : real_roots) n += rr.multiplicity;
        for (const auto& cp : complex_pairs) n += 2 * cp.multiplicity;
        return n;
    }
};

// Merge near-identical roots (relative tolerance), snap tiny imaginary parts
// to the real axis, and pair the remaining roots into conjugate pairs.
inline RootSet cluster_roots(const std::vector<Complex>& roots, double tol = 1e-6) {
    if (!(tol > 0.0)) throw std::invalid_argument("cluster_roots: tol must be > 0");
    const int n = static_cast<int>(roots.size());

    // Connected components under the pairwise merge relation.
    std::vector<int> comp(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) comp[static_cast<size_t>(i)] = i;
    const auto find = [&](int i) {
        while (comp[static_cast<size_t>(i)] != i) i = comp[static_cast<size_t>(i)] = comp[static_cast<size_t>(comp[static_cast<size_t>(i)])];
        return i;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double scale = std::max(1.0, std::max(std::abs(roots[static_cast<size_t>(i)]), std::abs(roots[static_cast<size_t>(j)])));
            if (std::abs(roots[static_cast<size_t>(i)] - roots[static_cast<size_t>(j)]) <= tol * scale) {
                comp[static_cast<size_t>(find(i))] = find(j);
            }
        }
    }

    struct Cluster {
        Complex mean;
        int size;
    };
    std::vector<Cluster> clusters;
    std::vector<int> head(static_cast<size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        const int root_id = find(i);
        if (head[static_cast<size_t>(root_id)] < 0) {
            head[static_cast<size_t>(root_id)] = static_cast<int>(clusters.size());
            clusters.push_back({Complex(0.0, 0.0), 0});
        }
        Cluster& c = clusters[static_cast<size_t>(head[static_cast<size_t>(root_id)])];
        c.mean += roots[static_cast<size_t>(i)];
        c.size += 1;
    }
    for (Cluster& c : clusters) c.mean /= static_cast<double>(c.size);

    RootSet out;
    std::vector<Cluster> complex_clusters;
    for (const Cluster& c : clusters) {
        if (std::abs(c.mean.imag()) <= tol * (1.0 + std::abs(c.mean.real()))) {
            out.real_roots.push_back({c.mean.real(), c.size});
        } else {
            complex_clusters.push_back(c);
        }
    }

    // Pair each upper-half-plane cluster with its conjugate.
    std::vector<bool> used(complex_clusters.size(), false);
    for (size_t i = 0; i < complex_clusters.size(); ++i) {
        if (used[i] || complex_clusters[i].mean.imag() < 0.0) continue;
        const Complex want = std::conj(complex_clusters[i].mean);
        int match = -1;
        double best = std::numeric_limits<double>::max();
        for (size_t j = 0; j < complex_clusters.size(); ++j) {
            if (used[j] || j == i || complex_clusters[j].mean.imag() > 0.0) continue;
            const double d = std::abs(complex_clusters[j].mean - want);
            if (d < best) {
                best = d;
                match = static_cast<int>(j);
            }
        }
        const double scale = std::max(1.0, std::abs(want));
        if (match < 0 || best > tol * scale || complex_clusters[static_cast<size_t>(match)].size != complex_clusters[i].size) {
            throw root_iteration_error("cluster_roots: conjugate pairing failed");
        }
        used[i] = used[static_cast<size_t>(match)] = true;
        const Complex a = complex_clusters[i].mean;
        const Complex b = complex_clusters[static_cast<size_t>(match)].mean;
        out.complex_pairs.push_back({0.5 * (a.real() + b.real()),
                                     0.5 * (a.imag() - b.imag()),
                                     complex_clusters[i].size});
    }
    for (size_t i = 0; i < complex_clusters.size(); ++i) {
        if (!used[i]) throw root_iteration_error("cluster_roots: unpaired complex root");
    }

    std::sort(out.real_roots.begin(), out.real_roots.end(),
              [](const RealRoot& a, const RealRoot& b) { return a.r < b.r; });
    std::sort(out.complex_pairs.begin(), out.complex_pairs.end(), [](const ComplexPair& a, const ComplexPair& b) {
        return a.re != b.re ? a.re < b.re : a.im < b.im;
    });
    return out;
}

// --------------------------------------------------------- dense linear

class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * static_cast<size_t>(cols_) + static_cast<size_t>(j)]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * static_cast<size_t>(cols_) + static_cast<size_t>(j)]; }

    double inf_norm() const {
        double best = 0.0;
        for (int i = 0; i < rows_; ++i) {
            double row = 0.0;
            for (int j = 0; j < cols_; ++j) row += std::abs((*this)(i, j));
            best = std::max(best, row);
        }
        return best;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

// LU factorization with partial pivoting. Solves carry one step of iterative
// refinement against the stored original matrix.
class LuFactor {
public:
    static LuFactor decompose(const Mat& a) {
        if (a.rows() != a.cols()) throw std::invalid_argument("LuFactor: matrix must be square");
        LuFactor f;
        f.original_ = a;
        f.lu_ = a;
        f.norm_a_ = a.inf_norm();
        const int n = a.rows();
        f.piv_.resize(static_cast<size_t>(n));
        f.sign_ = 1;
        const double pivot_floor = 1e-13 * std::max(f.norm_a_, std::numeric_limits<double>::min());
        for (int k = 0; k < n; ++k) {
            int p = k;
            for (int i = k + 1; i < n; ++i) {
                if (std::abs(f.lu_(i, k)) > std::abs(f.lu_(p, k))) p = i;
            }
            if (std::abs(f.lu_(p, k)) < pivot_floor) {
                throw singular_matrix_error("lu: pivot below 1e-13 * |A|_inf (matrix numerically singular)");
            }
            if (p != k) {
                for (int j = 0; j < n; ++j) std::swap(f.lu_(p, j), f.lu_(k, j));
                f.sign_ = -f.sign_;
            }
            f.piv_[static_cast<size_t>(k)] = p;
            for (int i = k + 1; i < n; ++i) {
                f.lu_(i, k) /= f.lu_(k, k);
                for (int j = k + 1; j < n; ++j) f.lu_(i, j) -= f.lu_(i, k) * f.lu_(k, j);
            }
        }
        return f;
    }

    std::vector<double> solve(const std::vector<double>& b) const {
        std::vector<double> x = substitute(b);
        // One refinement pass.
        const int n = lu_.rows();
        std::vector<double> r(b);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += original_(i, j) * x[static_cast<size_t>(j)];
            r[static_cast<size_t>(i)] -= acc;
        }
        const std::vector<double> dx = substitute(r);
        for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] += dx[static_cast<size_t>(i)];
        return x;
    }

    double det() const {
        double d = static_cast<double>(sign_);
        for (int i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
        return d;
    }

    // Exact |A^-1|_inf (n extra solves; matrices here are tiny).
    double condition_inf() const {
        const int n = lu_.rows();
        std::vector<double> row_sum(static_cast<size_t>(n), 0.0);
        std::vector<double> e(static_cast<size_t>(n), 0.0);
        for (int j = 0; j < n; ++j) {
            e[static_cast<size_t>(j)] = 1.0;
            const std::vector<double> col = substitute(e);
            e[static_cast<size_t>(j)] = 0.0;
            for (int i = 0; i < n; ++i) row_sum[static_cast<size_t>(i)] += std::abs(col[static_cast<size_t>(i)]);
        }
        double inv_norm = 0.0;
        for (double s : row_sum) inv_norm = std::max(inv_norm, s);
        return inv_norm * norm_a_;
    }

private:
    std::vector<double> substitute(const std::vector<double>& b) const {
        const int n = lu_.rows();
        if (static_cast<int>(b.size()) != n) throw std::invalid_argument("lu solve: dimension mismatch");
        std::vector<double> x(b);
        // Row interchanges first (the stored multipliers are post-swap), then
        // the unit-lower and upper triangular solves.
        for (int k = 0; k < n; ++k) std::swap(x[static_cast<size_t>(k)], x[static_cast<size_t>(piv_[static_cast<size_t>(k)])]);
        for (int k = 0; k < n; ++k) {
            for (int i = k + 1; i < n; ++i) x[static_cast<size_t>(i)] -= lu_(i, k) * x[static_cast<size_t>(k)];
        }
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[static_cast<size_t>(i)] -= lu_(i, j) * x[static_cast<size_t>(j)];
            x[static_cast<size_t>(i)] /= lu_(i, i);
        }
        return x;
    }

    Mat original_;
    Mat lu_;
    std::vector<int> piv_;
    int sign_ = 1;
    double norm_a_ = 0.0;
};

struct LuSolution {
    std::vector<double> x;
    double condition = 0.0;
};

inline LuSolution lu_solve(const Mat& a, const std::vector<double>& b) {
    const LuFactor f = LuFactor::decompose(a);
    return {f.solve(b), f.condition_inf()};
}

// ------------------------------------------------------------ quadrature

struct QuadConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_depth = 40;
};

struct QuadResult {
    double value = 0.0;
    double error_bound = 0.0;
    bool depth_exceeded = false;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss (positive abscissae).
inline constexpr double kKronrodX[8] = {
    0.99145537112081263920685469752633,
    0.94910791234275852452618968404785,
    0.86486442335976907278971278864093,
    0.74153118559939443986386477328079,
    0.58608723546769113029414483825873,
    0.40584515137739716690660641207696,
    0.20778495500789846760068940377324,
    0.0,
};
inline constexpr double kKronrodW[8] = {
    0.02293532201052922496373200805897,
    0.06309209262997855329070066318921,
    0.10479001032225018383987632254152,
    0.14065325971552591874518959051024,
    0.16900472663926790282658342659855,
    0.19035057806478540991325640242101,
    0.20443294007529889241416199923465,
    0.20948214108472782801299917489171,
};
inline constexpr double kGaussW[4] = {
    0.12948496616886969327061143267908,
    0.27970539148927666790146777142378,
    0.38183005050511894495036977548898,
    0.41795918367346938775510204081633,
};

struct Panel {
    double k15 = 0.0;
    double err = 0.0;
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k15 = kKronrodW[7] * fc;
    double g7 = kGaussW[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kKronrodX[i];
        const double fsum = f(c - dx) + f(c + dx);
        k15 += kKronrodW[i] * fsum;
        if (i & 1) g7 += kGaussW[i / 2] * fsum;
    }
    k15 *= h;
    g7 *= h;
    return {k15, std::abs(k15 - g7)};
}

template <class F>
void quad_recurse(F& f, double a, double b, const Panel& panel, double tol, int depth, int max_depth, QuadResult& out) {
    if (panel.err <= tol || depth >= max_depth) {
        out.value += panel.k15;
        out.error_bound += panel.err;
        if (depth >= max_depth && panel.err > tol) out.depth_exceeded = true;
        return;
    }
    const double mid = 0.5 * (a + b);
    const Panel left = gk15(f, a, mid);
    const Panel right = gk15(f, mid, b);
    quad_recurse(f, a, mid, left, 0.5 * tol, depth + 1, max_depth, out);
    quad_recurse(f, mid, b, right, 0.5 * tol, depth + 1, max_depth, out);
}

} // namespace detail

// Adaptive bisection with an embedded Gauss-Kronrod error estimate. The
// result satisfies |value - true| <= max(abs_tol, rel_tol*|value|) for smooth
// integrands; on max-depth exhaustion the best estimate plus its bound is
// returned with the flag set.
template <class F>
QuadResult adaptive_quad(F&& f, double a, double b, QuadConfig cfg = {}) {
    if (!(a < b)) throw std::invalid_argument("adaptive_quad: requires a < b");
    if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0) || cfg.max_depth < 10) {
        throw std::invalid_argument("adaptive_quad: invalid QuadConfig");
    }
    auto& fn = f;
    const detail::Panel whole = detail::gk15(fn, a, b);
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(whole.k15));
    QuadResult out;
    detail::quad_recurse(fn, a, b, whole, tol, 0, cfg.max_depth, out);
    return out;
}

// M-integral of order (alpha, beta): Gamma(beta+1) * Int_a^t f(x) x^(alpha-1) dx,
// evaluated after the exact substitution s = x^alpha which maps the weighted
// integral to (Gamma(beta+1)/alpha) * Int f(s^(1/alpha)) ds.
template <class F>
QuadResult m_integral(F&& f, double a, double t, double alpha, double beta, QuadConfig cfg = {}) {
    if (!(a > 0.0)) throw std::invalid_argument("m_integral: lower limit must be > 0");
    if (!(t >= a)) throw std::invalid_argument("m_integral: requires t >= a");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("m_integral: alpha must be in (0,1]");
    const double scale = gamma(beta + 1.0) / alpha;
    if (t == a) return {0.0, 0.0, false};
    QuadResult q;
    if (alpha == 1.0) {
        q = adaptive_quad(f, a, t, cfg);
    } else {
        const double inv_alpha = 1.0 / alpha;
        auto g = [&](double s) { return f(std::pow(s, inv_alpha)); };
        q = adaptive_quad(g, std::pow(a, alpha), std::pow(t, alpha), cfg);
    }
    return {scale * q.value, scale * q.error_bound, q.depth_exceeded};
}

} // namespace mfrac
