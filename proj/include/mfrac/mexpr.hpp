#pragma once

// Closed-form solution terms in the u-basis, u(t) = (Gamma(beta+1)/alpha)*t^alpha,
// where the M-derivative acts as d/du, together with the forcing-function
// expression grammar (parser, printer, evaluator).

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfrac/numerics.hpp"

namespace mfrac {

// The scaled variable u(t) = (Gamma(beta+1)/alpha) * t^alpha.
inline double u_of_t(double alpha, double beta, double t) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("u_of_t: alpha must be in (0,1]");
    if (!(beta > 0.0)) throw std::domain_error("u_of_t: beta must be > 0");
    if (!(t > 0.0)) throw std::domain_error("u_of_t: t must be > 0");
    return gamma(beta + 1.0) / alpha * std::pow(t, alpha);
}

// ------------------------------------------------------------- MTerm

// One basis term coeff * u^power * e^(rate*u). Power is capped at 15; the
// solver never needs higher multiplicities (polynomial degree <= 16).
struct MTerm {
    Complex coeff{1.0, 0.0};
    int power = 0;
    Complex rate{0.0, 0.0};
};

inline constexpr int kMaxTermPower = 15;

inline Complex eval_mterm(const MTerm& term, double alpha, double beta, double t) {
    const double u = u_of_t(alpha, beta, t);
    double upow = 1.0;
    for (int i = 0; i < term.power; ++i) upow *= u;
    const Complex value = term.coeff * upow * std::exp(term.rate * u);
    if (std::abs(value.real()) > 1e300 || std::abs(value.imag()) > 1e300) {
        throw evaluation_overflow_error("eval_mterm: |value| > 1e300");
    }
    return value;
}

// ----------------------------------------------------------- MPolyExp

// Sum of MTerms, kept merged (terms with identical (power, rate) combined,
// exact-zero coefficients dropped) and sorted for deterministic output.
class MPolyExp {
public:
    MPolyExp() = default;
    explicit MPolyExp(std::vector<MTerm> terms) : terms_(std::move(terms)) { normalize(); }
    explicit MPolyExp(const MTerm& term) : terms_{term} { normalize(); }

    static MPolyExp zero() { return MPolyExp(); }
    static MPolyExp constant(Complex c) { return MPolyExp(MTerm{c, 0, Complex(0.0, 0.0)}); }

    const std::vector<MTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    MPolyExp& operator+=(const MPolyExp& rhs) {
        terms_.insert(terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
        normalize();
        return *this;
    }

    friend MPolyExp operator+(MPolyExp lhs, const MPolyExp& rhs) {
        lhs += rhs;
        return lhs;
    }

    friend MPolyExp operator*(const MPolyExp& lhs, const MPolyExp& rhs) {
        std::vector<MTerm> out;
        out.reserve(lhs.terms_.size() * rhs.terms_.size());
        for (const MTerm& a : lhs.terms_) {
            for (const MTerm& b : rhs.terms_) {
                if (a.power + b.power > kMaxTermPower) {
                    throw std::invalid_argument("MPolyExp: product exceeds power bound");
                }
                out.push_back({a.coeff * b.coeff, a.power + b.power, a.rate + b.rate});
            }
        }
        return MPolyExp(std::move(out));
    }

    MPolyExp scaled(Complex factor) const {
        std::vector<MTerm> out = terms_;
        for (MTerm& t : out) t.coeff *= factor;
        return MPolyExp(std::move(out));
    }

    Complex eval(double alpha, double beta, double t) const {
        Complex acc{0.0, 0.0};
        for (const MTerm& term : terms_) acc += eval_mterm(term, alpha, beta, t);
        return acc;
    }

    // Real-valued evaluation; conjugate-paired terms cancel the imaginary
    // part up to roundoff. A large imaginary remainder signals misuse, but
    // the comparison must allow for cancellation when the real part lands
    // near a zero of a large oscillatory pair.
    double eval_real(double alpha, double beta, double t) const {
        const Complex v = eval(alpha, beta, t);
        if (std::abs(v.imag()) > 1e-6 * (1.0 + std::abs(v.real()))) {
            double term_magnitude = 0.0;
            for (const MTerm& term : terms_) term_magnitude += std::abs(eval_mterm(term, alpha, beta, t));
            if (std::abs(v.imag()) > 1e-9 * term_magnitude) {
                throw evaluation_overflow_error("MPolyExp::eval_real: non-negligible imaginary part");
            }
        }
        return v.real();
    }

private:
    void normalize() {
        // Merge key: (power, rate rounded at 1e-12 on both components).
        const auto key = [](const MTerm& t) {
            return std::tuple<int, long long, long long>(
                t.power,
                static_cast<long long>(std::llround(t.rate.real() * 1e12)),
                static_cast<long long>(std::llround(t.rate.imag() * 1e12)));
        };
        std::sort(terms_.begin(), terms_.end(), [&](const MTerm& a, const MTerm& b) { return key(a) < key(b); });
        std::vector<MTerm> merged;
        for (const MTerm& t : terms_) {
            if (t.power < 0 || t.power > kMaxTermPower) throw std::invalid_argument("MTerm: power out of range [0,15]");
            if (!merged.empty() && key(merged.back()) == key(t)) {
                merged.back().coeff += t.coeff;
            } else {
                merged.push_back(t);
            }
        }
        terms_.clear();
        for (const MTerm& t : merged) {
            if (t.coeff.real() == 0.0 && t.coeff.imag() == 0.0) continue;
            terms_.push_back(t);
        }
    }

    std::vector<MTerm> terms_;
};

// Exact symbolic M-derivative: D(u^l e^(ru)) = (l u^(l-1) + r u^l) e^(ru).
inline MPolyExp m_derivative(const MPolyExp& expr) {
    std::vector<MTerm> out;
    out.reserve(2 * expr.terms().size());
    for (const MTerm& t : expr.terms()) {
        if (t.power > 0) out.push_back({t.coeff * static_cast<double>(t.power), t.power - 1, t.rate});
        out.push_back({t.coeff * t.rate, t.power, t.rate});
    }
    return MPolyExp(std::move(out));
}

inline MPolyExp m_derivative_n(MPolyExp expr, int order) {
    for (int i = 0; i < order; ++i) expr = m_derivative(expr);
    return expr;
}

class not_conjugate_pair_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RealFormPair {
    MPolyExp cos_form; // u^l e^(au) cos(bu)
    MPolyExp sin_form; // u^l e^(au) sin(bu)
};

// Euler split of a conjugate pair of MTerms with rates a +/- ib into the two
// real-valued functions spanning the same solution plane.
inline RealFormPair real_form(const MTerm& first, const MTerm& second) {
    if (first.power != second.power) throw not_conjugate_pair_error("real_form: powers differ");
    const double scale = 1.0 + std::abs(first.rate);
    if (std::abs(second.rate - std::conj(first.rate)) > 1e-12 * scale) {
        throw not_conjugate_pair_error("real_form: rates are not a conjugate pair");
    }
    if (std::abs(first.rate.imag()) <= 1e-12 * scale) {
        throw not_conjugate_pair_error("real_form: pair is real (b == 0)");
    }
    const double a = 0.5 * (first.rate.real() + second.rate.real());
    const double b = std::abs(0.5 * (first.rate.imag() - second.rate.imag()));
    const Complex up(a, b), down(a, -b);
    const int l = first.power;
    MPolyExp cos_form(std::vector<MTerm>{{Complex(0.5, 0.0), l, up}, {Complex(0.5, 0.0), l, down}});
    MPolyExp sin_form(std::vector<MTerm>{{Complex(0.0, -0.5), l, up}, {Complex(0.0, 0.5), l, down}});
    return {std::move(cos_form), std::move(sin_form)};
}

// ------------------------------------------------------------- MExpr

// Forcing-function expression tree. Node kinds: constant, t^g, exp/sin/cos of
// c*t^g, sum, product, and scalar multiple. Exponents are fixed numbers once
// parsed ("a" is substituted by the problem's alpha at parse time).

class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& message, size_t offset, std::vector<std::string> expected)
        : std::runtime_error(message + " at offset " + std::to_string(offset)),
          offset_(offset),
          expected_(std::move(expected)) {}

    size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    size_t offset_;
    std::vector<std::string> expected_;
};

struct MExpr {
    enum class Kind { Constant, Power, Exp, Sin, Cos, Sum, Product, Scale };

    Kind kind = Kind::Constant;
    double value = 0.0;    // Constant value or Scale factor
    double coeff = 1.0;    // c in exp/sin/cos(c * t^gamma)
    double exponent = 1.0; // gamma in t^gamma and in function arguments
    std::vector<MExpr> children;

    static MExpr constant(double c) {
        MExpr e;
        e.kind = Kind::Constant;
        e.value = c;
        return e;
    }
    static MExpr power(double gamma_exp) {
        MExpr e;
        e.kind = Kind::Power;
        e.exponent = gamma_exp;
        return e;
    }
    static MExpr func(Kind k, double c, double gamma_exp) {
        MExpr e;
        e.kind = k;
        e.coeff = c;
        e.exponent = gamma_exp;
        return e;
    }
    static MExpr sum(std::vector<MExpr> parts) {
        MExpr e;
        e.kind = Kind::Sum;
        e.children = std::move(parts);
        return e;
    }
    static MExpr product(std::vector<MExpr> parts) {
        MExpr e;
        e.kind = Kind::Product;
        e.children = std::move(parts);
        return e;
    }
    static MExpr scale(double s, MExpr inner) {
        MExpr e;
        e.kind = Kind::Scale;
        e.value = s;
        e.children.push_back(std::move(inner));
        return e;
    }
};

inline double eval_expr(const MExpr& e, double t) {
    if (!(t > 0.0)) throw std::domain_error("eval_expr: t must be > 0");
    double v = 0.0;
    switch (e.kind) {
        case MExpr::Kind::Constant: v = e.value; break;
        case MExpr::Kind::Power: v = std::pow(t, e.exponent); break;
        case MExpr::Kind::Exp: v = std::exp(e.coeff * std::pow(t, e.exponent)); break;
        case MExpr::Kind::Sin: v = std::sin(e.coeff * std::pow(t, e.exponent)); break;
        case MExpr::Kind::Cos: v = std::cos(e.coeff * std::pow(t, e.exponent)); break;
        case MExpr::Kind::Sum:
            for (const MExpr& c : e.children) v += eval_expr(c, t);
            break;
        case MExpr::Kind::Product:
            v = 1.0;
            for (const MExpr& c : e.children) v *= eval_expr(c, t);
            break;
        case MExpr::Kind::Scale: v = e.value * eval_expr(e.children.front(), t); break;
    }
    if (std::abs(v) > 1e300) throw evaluation_overflow_error("eval_expr: |value| > 1e300");
    return v;
}

namespace detail {

inline constexpr int kMaxExprDepth = 32;

// Recursive-descent parser over the forcing grammar:
//   expr := term (("+"|"-") term)* ; term := factor ("*" factor)* ;
//   factor := primary ("^" exponent)? ;
//   primary := NUMBER | "t" | "(" expr ")" | FUNC "(" expr ")" ;
//   FUNC := "exp" | "sin" | "cos" ;
//   exponent := NUMBER | "a" | "(" NUMBER "*" "a" ")"
class ExprParser {
public:
    ExprParser(const std::string& text, double alpha) : text_(text), alpha_(alpha) {}

    MExpr parse() {
        MExpr e = parse_expr_rule(0);
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input", {"+", "-", "*", "^", "end of input"});
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
        throw parse_error("parse error: " + msg, pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek_char(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool consume_char(char c) {
        if (peek_char(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_char(char c) {
        if (!consume_char(c)) fail(std::string("expected '") + c + "'", {std::string(1, c)});
    }

    bool number_starts_here() {
        skip_ws();
        if (pos_ >= text_.size()) return false;
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return true;
        if (c == '.' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) return true;
        if ((c == '+' || c == '-') && pos_ + 1 < text_.size()) {
            const char d = text_[pos_ + 1];
            if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') return true;
        }
        return false;
    }

    double parse_number() {
        skip_ws();
        const size_t start = pos_;
        size_t i = pos_;
        if (i < text_.size() && (text_[i] == '+' || text_[i] == '-')) ++i;
        size_t digits = 0;
        while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i, ++digits;
        if (i < text_.size() && text_[i] == '.') {
            ++i;
            while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i, ++digits;
        }
        if (digits == 0) fail("expected a number", {"number"});
        if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
            size_t j = i + 1;
            if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
            size_t exp_digits = 0;
            while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j, ++exp_digits;
            if (exp_digits > 0) i = j;
        }
        const std::string token = text_.substr(start, i - start);
        pos_ = i;
        return std::strtod(token.c_str(), nullptr);
    }

    std::string peek_ident() {
        skip_ws();
        size_t i = pos_;
        while (i < text_.size() && std::isalpha(static_cast<unsigned char>(text_[i]))) ++i;
        return text_.substr(pos_, i - pos_);
    }

    MExpr parse_expr_rule(int depth) {
        check_depth(depth);
        std::vector<MExpr> parts;
        parts.push_back(parse_term(depth + 1));
        while (true) {
            if (consume_char('+')) {
                parts.push_back(parse_term(depth + 1));
            } else if (peek_minus_operator()) {
                ++pos_;
                parts.push_back(MExpr::scale(-1.0, parse_term(depth + 1)));
            } else {
                break;
            }
        }
        if (parts.size() == 1) return std::move(parts.front());
        return MExpr::sum(std::move(parts));
    }

    // A '-' here is always the binary operator: unary signs are consumed as
    // part of NUMBER tokens inside primary().
    bool peek_minus_operator() { return peek_char('-'); }

    MExpr parse_term(int depth) {
        check_depth(depth);
        std::vector<MExpr> parts;
        parts.push_back(parse_factor(depth + 1));
        while (consume_char('*')) parts.push_back(parse_factor(depth + 1));
        if (parts.size() == 1) return std::move(parts.front());
        return MExpr::product(std::move(parts));
    }

    MExpr parse_factor(int depth) {
        check_depth(depth);
        MExpr base = parse_primary(depth + 1);
        if (!consume_char('^')) return base;
        const double expo = parse_exponent();

        if (base.kind == MExpr::Kind::Constant) return MExpr::constant(std::pow(base.value, expo));
        if (base.kind == MExpr::Kind::Power) {
            const double g = base.exponent * expo;
            if (!(g > 0.0)) fail("power of t must have a positive exponent", {"positive exponent"});
            return MExpr::power(g);
        }
        // General base: only small nonnegative integer exponents, expanded to
        // a product.
        const double r = std::round(expo);
        if (std::abs(expo - r) > 1e-12 || r < 0.0 || r > 6.0) {
            fail("exponent on a non-atomic base must be an integer in [0,6]", {"integer exponent"});
        }
        const int k = static_cast<int>(r);
        if (k == 0) return MExpr::constant(1.0);
        std::vector<MExpr> parts(static_cast<size_t>(k), base);
        if (k == 1) return base;
        return MExpr::product(std::move(parts));
    }

    double parse_exponent() {
        skip_ws();
        if (consume_char('(')) {
            const double num = parse_number();
            expect_char('*');
            if (peek_ident() != "a") fail("expected 'a'", {"a"});
            pos_ += 1;
            expect_char(')');
            return num * alpha_;
        }
        if (peek_ident() == "a") {
            pos_ += 1;
            return alpha_;
        }
        if (number_starts_here()) return parse_number();
        fail("expected an exponent", {"number", "a", "( number * a )"});
    }

    MExpr parse_primary(int depth) {
        check_depth(depth);
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input", {"number", "t", "(", "exp", "sin", "cos"});

        if (number_starts_here()) return MExpr::constant(parse_number());

        if (consume_char('(')) {
            MExpr inner = parse_expr_rule(depth + 1);
            expect_char(')');
            return inner;
        }

        const std::string ident = peek_ident();
        if (ident == "t") {
            pos_ += 1;
            return MExpr::power(1.0);
        }
        if (ident == "exp" || ident == "sin" || ident == "cos") {
            const size_t func_offset = pos_;
            pos_ += ident.size();
            expect_char('(');
            MExpr arg = parse_expr_rule(depth + 1);
            expect_char(')');
            return make_func(ident, std::move(arg), func_offset);
        }
        fail("expected a primary expression", {"number", "t", "(", "exp", "sin", "cos"});
    }

    // Fold a function argument into monomial form c * t^gamma.
    static std::optional<std::pair<double, double>> reduce_monomial(const MExpr& e) {
        switch (e.kind) {
            case MExpr::Kind::Constant: return std::make_pair(e.value, 0.0);
            case MExpr::Kind::Power: return std::make_pair(1.0, e.exponent);
            case MExpr::Kind::Scale: {
                auto inner = reduce_monomial(e.children.front());
                if (!inner) return std::nullopt;
                return std::make_pair(e.value * inner->first, inner->second);
            }
            case MExpr::Kind::Product: {
                double c = 1.0, g = 0.0;
                for (const MExpr& child : e.children) {
                    auto part = reduce_monomial(child);
                    if (!part) return std::nullopt;
                    c *= part->first;
                    g += part->second;
                }
                return std::make_pair(c, g);
            }
            case MExpr::Kind::Sum:
                if (e.children.size() == 1) return reduce_monomial(e.children.front());
                return std::nullopt;
            default: return std::nullopt;
        }
    }

    MExpr make_func(const std::string& name, MExpr arg, size_t offset) {
        const auto mono = reduce_monomial(arg);
        if (!mono) {
            throw parse_error("parse error: function argument must reduce to c*t^gamma", offset,
                              {"c*t^gamma argument"});
        }
        const auto [c, g] = *mono;
        const MExpr::Kind kind = name == "exp"   ? MExpr::Kind::Exp
                                 : name == "sin" ? MExpr::Kind::Sin
                                                 : MExpr::Kind::Cos;
        if (g == 0.0) {
            // Function of a constant folds to a constant.
            const double v = kind == MExpr::Kind::Exp ? std::exp(c) : kind == MExpr::Kind::Sin ? std::sin(c) : std::cos(c);
            return MExpr::constant(v);
        }
        if (!(g > 0.0)) {
            throw parse_error("parse error: function argument exponent must be positive", offset, {"gamma > 0"});
        }
        return MExpr::func(kind, c, g);
    }

    void check_depth(int depth) const {
        if (depth > kMaxExprDepth) {
            throw parse_error("parse error: expression nesting exceeds depth 32", pos_, {"shallower expression"});
        }
    }

    const std::string& text_;
    double alpha_;
    size_t pos_ = 0;
};

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Parse a forcing expression; the token `a` denotes alpha and is substituted
// at parse time.
inline MExpr parse_expr(const std::string& text, double alpha) {
    if (text.empty()) throw parse_error("parse error: empty expression", 0, {"expression"});
    if (text.size() > 4096) throw parse_error("parse error: expression longer than 4096 chars", 4096, {"shorter expression"});
    detail::ExprParser parser(text, alpha);
    return parser.parse();
}

// Grammar-conformant rendering; print_expr followed by parse_expr evaluates
// pointwise-identically.
inline std::string print_expr(const MExpr& e) {
    using K = MExpr::Kind;
    const auto func_body = [&](const char* name) {
        std::string s = name;
        s += '(';
        if (e.coeff != 1.0) s += detail::format_number(e.coeff) + "*";
        s += e.exponent == 1.0 ? "t" : "t^" + detail::format_number(e.exponent);
        s += ')';
        return s;
    };
    switch (e.kind) {
        case K::Constant: return detail::format_number(e.value);
        case K::Power: return e.exponent == 1.0 ? "t" : "t^" + detail::format_number(e.exponent);
        case K::Exp: return func_body("exp");
        case K::Sin: return func_body("sin");
        case K::Cos: return func_body("cos");
        case K::Sum: {
            std::string s;
            for (size_t i = 0; i < e.children.size(); ++i) {
                const MExpr& c = e.children[i];
                if (i == 0) {
                    s += print_expr(c);
                } else if (c.kind == K::Scale && c.value < 0.0) {
                    MExpr flipped = c;
                    flipped.value = -flipped.value;
                    s += " - " + print_expr(flipped);
                } else if (c.kind == K::Constant && c.value < 0.0) {
                    s += " - " + detail::format_number(-c.value);
                } else {
                    s += " + " + print_expr(c);
                }
            }
            return s;
        }
        case K::Product: {
            std::string s;
            for (size_t i = 0; i < e.children.size(); ++i) {
                if (i > 0) s += "*";
                const MExpr& c = e.children[i];
                const bool needs_parens = c.kind == K::Sum;
                s += needs_parens ? "(" + print_expr(c) + ")" : print_expr(c);
            }
            return s;
        }
        case K::Scale: {
            const MExpr& c = e.children.front();
            const bool needs_parens = c.kind == K::Sum;
            std::string inner = needs_parens ? "(" + print_expr(c) + ")" : print_expr(c);
            if (e.value == 1.0 && c.kind != K::Sum) return inner;
            return detail::format_number(e.value) + "*" + inner;
        }
    }
    return {};
}

} // namespace mfrac
