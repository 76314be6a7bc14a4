#pragma once

#include <cassert>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "monodromy/linalg.hpp"

namespace monodromy {

// ---------------------------------------------------------------------------
// Symbolic expressions over complex-valued variables.
//
// The node set is deliberately small and purely holomorphic: constants,
// variables, sum, product, quotient, power with a numeric exponent, negation
// and the unary functions sin, cos, tan, sinh, cosh, exp, log, sqrt.
// Expressions are immutable and shareable across threads.
// ---------------------------------------------------------------------------

enum class ExprKind { Constant, Variable, Sum, Product, Quotient, Power, Negate, Call };

enum class Func { Sin, Cos, Tan, Sinh, Cosh, Exp, Log, Sqrt };

inline std::string_view func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Sinh: return "sinh";
        case Func::Cosh: return "cosh";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
    }
    return "?";
}

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t offset_)
        : std::runtime_error(msg + " (at offset " + std::to_string(offset_) + ")"),
          offset(offset_) {}
    std::size_t offset;
};

struct EvalError : std::runtime_error {
    enum class Kind { UnboundSymbol, Singular };
    EvalError(Kind kind_, const std::string& msg) : std::runtime_error(msg), kind(kind_) {}
    Kind kind;
};

class Expr {
public:
    Expr() = default; // empty handle; only produced as an unused child slot

    static Expr constant(Cx value);
    static Expr variable(std::string name);
    static Expr sum(Expr a, Expr b);
    static Expr product(Expr a, Expr b);
    static Expr quotient(Expr a, Expr b);
    static Expr power(Expr base, double exponent);
    static Expr negate(Expr a);
    static Expr call(Func f, Expr arg);

    bool valid() const { return node_ != nullptr; }
    ExprKind kind() const;
    Cx value() const;                 // Constant
    const std::string& name() const;  // Variable
    int slot() const;                 // Variable; -1 when unbound
    double exponent() const;          // Power
    Func func() const;                // Call
    const Expr& left() const;         // Sum/Product/Quotient, Power base
    const Expr& right() const;
    const Expr& arg() const;          // Negate/Call

    bool is_constant(Cx v) const {
        return valid() && kind() == ExprKind::Constant && value() == v;
    }

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;

    friend Expr bind_slots(const Expr&, std::span<const std::string>);
};

struct Expr::Node {
    ExprKind kind;
    Cx value{};
    std::string name;
    int slot = -1;
    double exponent = 0.0;
    Func func = Func::Sin;
    Expr a, b;
};

inline ExprKind Expr::kind() const { return node_->kind; }
inline Cx Expr::value() const { return node_->value; }
inline const std::string& Expr::name() const { return node_->name; }
inline int Expr::slot() const { return node_->slot; }
inline double Expr::exponent() const { return node_->exponent; }
inline Func Expr::func() const { return node_->func; }
inline const Expr& Expr::left() const { return node_->a; }
inline const Expr& Expr::right() const { return node_->b; }
inline const Expr& Expr::arg() const { return node_->a; }

namespace detail {

inline bool finite(Cx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline bool is_integer_exponent(double k) {
    return std::rint(k) == k && std::abs(k) < 9.0e15;
}

/// Integer powers by repeated multiplication; fractional powers on the
/// principal branch. Throws on poles and keeps results finite.
inline Cx complex_pow(Cx z, double k) {
    if (k == 0.0) return Cx(1.0, 0.0);
    if (is_integer_exponent(k)) {
        long long n = static_cast<long long>(k);
        bool inv = n < 0;
        unsigned long long m = inv ? static_cast<unsigned long long>(-n)
                                   : static_cast<unsigned long long>(n);
        if (z == Cx(0.0, 0.0)) {
            if (inv) throw EvalError(EvalError::Kind::Singular, "zero raised to a negative power");
            return Cx(0.0, 0.0);
        }
        Cx acc(1.0, 0.0), base = z;
        while (m > 0) {
            if (m & 1ull) acc *= base;
            base *= base;
            m >>= 1;
        }
        if (inv) {
            if (std::abs(acc) < 1e-300)
                throw EvalError(EvalError::Kind::Singular, "division by zero in negative power");
            acc = Cx(1.0, 0.0) / acc;
        }
        if (!finite(acc)) throw EvalError(EvalError::Kind::Singular, "non-finite power");
        return acc;
    }
    if (z == Cx(0.0, 0.0)) {
        if (k > 0.0) return Cx(0.0, 0.0);
        throw EvalError(EvalError::Kind::Singular, "zero raised to a negative power");
    }
    Cx r = std::pow(z, Cx(k, 0.0));
    if (!finite(r)) throw EvalError(EvalError::Kind::Singular, "non-finite power");
    return r;
}

inline Cx apply_func(Func f, Cx z) {
    Cx r;
    switch (f) {
        case Func::Sin: r = std::sin(z); break;
        case Func::Cos: r = std::cos(z); break;
        case Func::Tan: r = std::tan(z); break;
        case Func::Sinh: r = std::sinh(z); break;
        case Func::Cosh: r = std::cosh(z); break;
        case Func::Exp: r = std::exp(z); break;
        case Func::Log:
            if (z == Cx(0.0, 0.0)) throw EvalError(EvalError::Kind::Singular, "log of zero");
            r = std::log(z);
            break;
        case Func::Sqrt: r = std::sqrt(z); break;
        default: r = Cx(0.0, 0.0); break;
    }
    if (!finite(r))
        throw EvalError(EvalError::Kind::Singular,
                        std::string("non-finite value of ") + std::string(func_name(f)));
    return r;
}

inline bool try_apply_func(Func f, Cx z, Cx& out) {
    try {
        out = apply_func(f, z);
        return true;
    } catch (const EvalError&) {
        return false;
    }
}

} // namespace detail

// --- smart constructors: constant folding plus the 0/1 identities ----------

inline Expr Expr::constant(Cx value) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Constant;
    n->value = value;
    return Expr(std::move(n));
}

inline Expr Expr::variable(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Variable;
    n->name = std::move(name);
    return Expr(std::move(n));
}

inline Expr Expr::sum(Expr a, Expr b) {
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) {
        Cx v = a.value() + b.value();
        if (detail::finite(v)) return constant(v);
    }
    if (a.is_constant(Cx(0.0, 0.0))) return b;
    if (b.is_constant(Cx(0.0, 0.0))) return a;
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Sum;
    n->a = std::move(a);
    n->b = std::move(b);
    return Expr(std::move(n));
}

inline Expr Expr::product(Expr a, Expr b) {
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) {
        Cx v = a.value() * b.value();
        if (detail::finite(v)) return constant(v);
    }
    if (a.is_constant(Cx(0.0, 0.0)) || b.is_constant(Cx(0.0, 0.0))) return constant(Cx(0.0, 0.0));
    if (a.is_constant(Cx(1.0, 0.0))) return b;
    if (b.is_constant(Cx(1.0, 0.0))) return a;
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Product;
    n->a = std::move(a);
    n->b = std::move(b);
    return Expr(std::move(n));
}

inline Expr Expr::quotient(Expr a, Expr b) {
    if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant &&
        std::abs(b.value()) >= 1e-300) {
        Cx v = a.value() / b.value();
        if (detail::finite(v)) return constant(v);
    }
    if (a.is_constant(Cx(0.0, 0.0)) && !b.is_constant(Cx(0.0, 0.0))) return constant(Cx(0.0, 0.0));
    if (b.is_constant(Cx(1.0, 0.0))) return a;
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Quotient;
    n->a = std::move(a);
    n->b = std::move(b);
    return Expr(std::move(n));
}

inline Expr Expr::power(Expr base, double exponent) {
    if (exponent == 0.0) return constant(Cx(1.0, 0.0));
    if (exponent == 1.0) return base;
    if (base.kind() == ExprKind::Constant) {
        try {
            return constant(detail::complex_pow(base.value(), exponent));
        } catch (const EvalError&) {
            // keep the node; evaluation reports the singularity
        }
    }
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Power;
    n->a = std::move(base);
    n->exponent = exponent;
    return Expr(std::move(n));
}

inline Expr Expr::negate(Expr a) {
    if (a.kind() == ExprKind::Constant) return constant(-a.value());
    if (a.kind() == ExprKind::Negate) return a.arg();
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Negate;
    n->a = std::move(a);
    return Expr(std::move(n));
}

inline Expr Expr::call(Func f, Expr arg) {
    if (arg.kind() == ExprKind::Constant) {
        Cx v;
        if (detail::try_apply_func(f, arg.value(), v)) return constant(v);
    }
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Call;
    n->func = f;
    n->a = std::move(arg);
    return Expr(std::move(n));
}

inline Expr operator+(Expr a, Expr b) { return Expr::sum(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) {
    return Expr::sum(std::move(a), Expr::negate(std::move(b)));
}
inline Expr operator*(Expr a, Expr b) { return Expr::product(std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::quotient(std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return Expr::negate(std::move(a)); }

// --- evaluation -------------------------------------------------------------

namespace detail {

template <class Lookup>
Cx eval_rec(const Expr& e, const Lookup& lookup) {
    switch (e.kind()) {
        case ExprKind::Constant: return e.value();
        case ExprKind::Variable: return lookup(e);
        case ExprKind::Sum: {
            Cx v = eval_rec(e.left(), lookup) + eval_rec(e.right(), lookup);
            if (!finite(v)) throw EvalError(EvalError::Kind::Singular, "non-finite sum");
            return v;
        }
        case ExprKind::Product: {
            Cx v = eval_rec(e.left(), lookup) * eval_rec(e.right(), lookup);
            if (!finite(v)) throw EvalError(EvalError::Kind::Singular, "non-finite product");
            return v;
        }
        case ExprKind::Quotient: {
            Cx num = eval_rec(e.left(), lookup);
            Cx den = eval_rec(e.right(), lookup);
            if (std::abs(den) < 1e-300)
                throw EvalError(EvalError::Kind::Singular, "division by zero");
            Cx v = num / den;
            if (!finite(v)) throw EvalError(EvalError::Kind::Singular, "non-finite quotient");
            return v;
        }
        case ExprKind::Power: return complex_pow(eval_rec(e.left(), lookup), e.exponent());
        case ExprKind::Negate: return -eval_rec(e.arg(), lookup);
        case ExprKind::Call: return apply_func(e.func(), eval_rec(e.arg(), lookup));
    }
    throw EvalError(EvalError::Kind::Singular, "invalid expression node");
}

} // namespace detail

inline Cx eval(const Expr& e, const std::map<std::string, Cx>& env) {
    return detail::eval_rec(e, [&env](const Expr& var) -> Cx {
        auto it = env.find(var.name());
        if (it == env.end())
            throw EvalError(EvalError::Kind::UnboundSymbol, "unbound symbol '" + var.name() + "'");
        return it->second;
    });
}

/// Fast path: variables must carry slot indices assigned by bind_slots().
inline Cx eval_slots(const Expr& e, std::span<const Cx> values) {
    return detail::eval_rec(e, [values](const Expr& var) -> Cx {
        int s = var.slot();
        if (s < 0 || static_cast<std::size_t>(s) >= values.size())
            throw EvalError(EvalError::Kind::UnboundSymbol, "unbound symbol '" + var.name() + "'");
        return values[static_cast<std::size_t>(s)];
    });
}

/// Rewrites variable nodes with the index of their symbol in `symbols`.
/// Unknown symbols stay unbound and fail at evaluation.
inline Expr bind_slots(const Expr& e, std::span<const std::string> symbols) {
    switch (e.kind()) {
        case ExprKind::Constant: return e;
        case ExprKind::Variable: {
            int slot = -1;
            for (std::size_t k = 0; k < symbols.size(); ++k) {
                if (symbols[k] == e.name()) {
                    slot = static_cast<int>(k);
                    break;
                }
            }
            auto n = std::make_shared<Expr::Node>();
            n->kind = ExprKind::Variable;
            n->name = e.name();
            n->slot = slot;
            return Expr(std::move(n));
        }
        case ExprKind::Sum:
            return Expr::sum(bind_slots(e.left(), symbols), bind_slots(e.right(), symbols));
        case ExprKind::Product:
            return Expr::product(bind_slots(e.left(), symbols), bind_slots(e.right(), symbols));
        case ExprKind::Quotient:
            return Expr::quotient(bind_slots(e.left(), symbols), bind_slots(e.right(), symbols));
        case ExprKind::Power: return Expr::power(bind_slots(e.left(), symbols), e.exponent());
        case ExprKind::Negate: return Expr::negate(bind_slots(e.arg(), symbols));
        case ExprKind::Call: return Expr::call(e.func(), bind_slots(e.arg(), symbols));
    }
    return e;
}

// --- symbolic differentiation ----------------------------------------------

inline Expr diff(const Expr& e, std::string_view symbol) {
    switch (e.kind()) {
        case ExprKind::Constant: return Expr::constant(Cx(0.0, 0.0));
        case ExprKind::Variable:
            return Expr::constant(e.name() == symbol ? Cx(1.0, 0.0) : Cx(0.0, 0.0));
        case ExprKind::Sum: return diff(e.left(), symbol) + diff(e.right(), symbol);
        case ExprKind::Product:
            return diff(e.left(), symbol) * e.right() + e.left() * diff(e.right(), symbol);
        case ExprKind::Quotient:
            return (diff(e.left(), symbol) * e.right() - e.left() * diff(e.right(), symbol)) /
                   Expr::power(e.right(), 2.0);
        case ExprKind::Power: {
            double k = e.exponent();
            return Expr::constant(Cx(k, 0.0)) * Expr::power(e.left(), k - 1.0) *
                   diff(e.left(), symbol);
        }
        case ExprKind::Negate: return -diff(e.arg(), symbol);
        case ExprKind::Call: {
            Expr da = diff(e.arg(), symbol);
            const Expr& a = e.arg();
            switch (e.func()) {
                case Func::Sin: return Expr::call(Func::Cos, a) * da;
                case Func::Cos: return -(Expr::call(Func::Sin, a) * da);
                case Func::Tan:
                    return da / Expr::power(Expr::call(Func::Cos, a), 2.0);
                case Func::Sinh: return Expr::call(Func::Cosh, a) * da;
                case Func::Cosh: return Expr::call(Func::Sinh, a) * da;
                case Func::Exp: return Expr::call(Func::Exp, a) * da;
                case Func::Log: return da / a;
                case Func::Sqrt:
                    return da / (Expr::constant(Cx(2.0, 0.0)) * Expr::call(Func::Sqrt, a));
            }
            break;
        }
    }
    throw std::logic_error("diff: invalid expression node");
}

// --- structure utilities ----------------------------------------------------

inline void collect_free_variables(const Expr& e, std::set<std::string>& out) {
    switch (e.kind()) {
        case ExprKind::Constant: return;
        case ExprKind::Variable: out.insert(e.name()); return;
        case ExprKind::Sum:
        case ExprKind::Product:
        case ExprKind::Quotient:
            collect_free_variables(e.left(), out);
            collect_free_variables(e.right(), out);
            return;
        case ExprKind::Power: collect_free_variables(e.left(), out); return;
        case ExprKind::Negate:
        case ExprKind::Call: collect_free_variables(e.arg(), out); return;
    }
}

inline std::set<std::string> free_variables(const Expr& e) {
    std::set<std::string> out;
    collect_free_variables(e, out);
    return out;
}

inline Expr substitute(const Expr& e, std::string_view symbol, const Expr& replacement) {
    switch (e.kind()) {
        case ExprKind::Constant: return e;
        case ExprKind::Variable: return e.name() == symbol ? replacement : e;
        case ExprKind::Sum:
            return Expr::sum(substitute(e.left(), symbol, replacement),
                             substitute(e.right(), symbol, replacement));
        case ExprKind::Product:
            return Expr::product(substitute(e.left(), symbol, replacement),
                                 substitute(e.right(), symbol, replacement));
        case ExprKind::Quotient:
            return Expr::quotient(substitute(e.left(), symbol, replacement),
                                  substitute(e.right(), symbol, replacement));
        case ExprKind::Power:
            return Expr::power(substitute(e.left(), symbol, replacement), e.exponent());
        case ExprKind::Negate: return Expr::negate(substitute(e.arg(), symbol, replacement));
        case ExprKind::Call: return Expr::call(e.func(), substitute(e.arg(), symbol, replacement));
    }
    return e;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ExprKind::Constant: return a.value() == b.value();
        case ExprKind::Variable: return a.name() == b.name();
        case ExprKind::Sum:
        case ExprKind::Product:
        case ExprKind::Quotient:
            return structurally_equal(a.left(), b.left()) &&
                   structurally_equal(a.right(), b.right());
        case ExprKind::Power:
            return a.exponent() == b.exponent() && structurally_equal(a.left(), b.left());
        case ExprKind::Negate:
        case ExprKind::Call:
            return (a.kind() != ExprKind::Call || a.func() == b.func()) &&
                   structurally_equal(a.arg(), b.arg());
    }
    return false;
}

// --- rendering --------------------------------------------------------------

namespace detail {

inline std::string render_real(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Renders a complex constant so that re-parsing folds back to the same value.
inline std::string render_complex(Cx v, int& prec) {
    const double re = v.real(), im = v.imag();
    if (im == 0.0) {
        prec = re < 0.0 ? 15 : 40;
        return render_real(re);
    }
    if (re == 0.0) {
        if (im == 1.0) {
            prec = 40;
            return "i";
        }
        if (im == -1.0) {
            prec = 15;
            return "-i";
        }
        prec = im < 0.0 ? 15 : 20;
        return render_real(im) + "*i";
    }
    prec = 40;
    std::string s = "(" + render_real(re);
    double a = std::abs(im);
    s += im < 0.0 ? " - " : " + ";
    s += (a == 1.0) ? "i" : render_real(a) + "*i";
    return s + ")";
}

// Precedence of the rendered form: sum 10, negation 15, product 20, power 30,
// atoms 40. Used to decide parenthesization on re-rendering.
inline std::string render_rec(const Expr& e, int& prec);

inline std::string render_child(const Expr& e, int min_prec) {
    int prec = 0;
    std::string s = render_rec(e, prec);
    if (prec < min_prec) return "(" + s + ")";
    return s;
}

inline std::string render_rec(const Expr& e, int& prec) {
    switch (e.kind()) {
        case ExprKind::Constant: {
            int p = 40;
            std::string s = render_complex(e.value(), p);
            prec = p;
            return s;
        }
        case ExprKind::Variable: prec = 40; return e.name();
        case ExprKind::Sum: {
            prec = 10;
            std::string lhs = render_child(e.left(), 10);
            if (e.right().kind() == ExprKind::Negate)
                return lhs + " - " + render_child(e.right().arg(), 11);
            return lhs + " + " + render_child(e.right(), 11);
        }
        case ExprKind::Product: {
            prec = 20;
            return render_child(e.left(), 20) + "*" + render_child(e.right(), 21);
        }
        case ExprKind::Quotient: {
            prec = 20;
            return render_child(e.left(), 20) + "/" + render_child(e.right(), 21);
        }
        case ExprKind::Power: {
            prec = 30;
            return render_child(e.left(), 31) + "^" + render_real(e.exponent());
        }
        case ExprKind::Negate: {
            prec = 15;
            return "-" + render_child(e.arg(), 21);
        }
        case ExprKind::Call: {
            prec = 40;
            int dummy = 0;
            return std::string(func_name(e.func())) + "(" + render_rec(e.arg(), dummy) + ")";
        }
    }
    prec = 40;
    return "";
}

} // namespace detail

inline std::string render(const Expr& e) {
    int prec = 0;
    return detail::render_rec(e, prec);
}

// --- parser -----------------------------------------------------------------
//
// expr   := term (('+'|'-') term)*
// term   := factor (('*'|'/') factor)*
// factor := base ('^' exponent)?          exponent := '-'? number
// base   := number | symbol | func '(' expr ')' | '(' expr ')' | '-' factor
//
// The symbol `i` is the imaginary unit. Juxtaposition is not multiplication.

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw ParseError(msg, at);
    }

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                src_[pos_] == '\r'))
            ++pos_;
    }

    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_symbol_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_symbol_char(char c) { return is_symbol_start(c) || is_digit(c); }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+')) {
                e = Expr::sum(std::move(e), parse_term());
            } else if (consume('-')) {
                e = Expr::sum(std::move(e), Expr::negate(parse_term()));
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            skip_ws();
            if (consume('*')) {
                e = Expr::product(std::move(e), parse_factor());
            } else if (consume('/')) {
                e = Expr::quotient(std::move(e), parse_factor());
            } else {
                return e;
            }
        }
    }

    Expr parse_factor() {
        Expr base = parse_base();
        skip_ws();
        if (consume('^')) {
            skip_ws();
            bool negative = consume('-');
            skip_ws();
            if (!is_digit(peek()) && peek() != '.')
                fail("exponent must be a numeric literal", pos_);
            double k = parse_number();
            return Expr::power(std::move(base), negative ? -k : k);
        }
        return base;
    }

    Expr parse_base() {
        skip_ws();
        char c = peek();
        if (c == '\0') fail("unexpected end of input", pos_);
        if (consume('-')) return Expr::negate(parse_factor());
        if (consume('(')) {
            Expr e = parse_expr();
            skip_ws();
            if (!consume(')')) fail("expected ')'", pos_);
            return e;
        }
        if (is_digit(c) || c == '.') return Expr::constant(Cx(parse_number(), 0.0));
        if (is_symbol_start(c)) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && is_symbol_char(src_[pos_])) ++pos_;
            std::string name(src_.substr(start, pos_ - start));
            skip_ws();
            if (peek() == '(') {
                Func f;
                if (!lookup_func(name, f)) fail("unknown function '" + name + "'", start);
                consume('(');
                Expr a = parse_expr();
                skip_ws();
                if (!consume(')')) fail("expected ')'", pos_);
                return Expr::call(f, std::move(a));
            }
            if (name == "i") return Expr::constant(Cx(0.0, 1.0));
            return Expr::variable(std::move(name));
        }
        fail(std::string("unexpected character '") + c + "'", pos_);
    }

    static bool lookup_func(const std::string& name, Func& out) {
        if (name == "sin") out = Func::Sin;
        else if (name == "cos") out = Func::Cos;
        else if (name == "tan") out = Func::Tan;
        else if (name == "sinh") out = Func::Sinh;
        else if (name == "cosh") out = Func::Cosh;
        else if (name == "exp") out = Func::Exp;
        else if (name == "log") out = Func::Log;
        else if (name == "sqrt") out = Func::Sqrt;
        else return false;
        return true;
    }

    double parse_number() {
        std::size_t start = pos_;
        while (is_digit(peek())) ++pos_;
        if (peek() == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1])) {
            ++pos_;
            while (is_digit(peek())) ++pos_;
        }
        if (pos_ == start) fail("malformed number", start);
        if (peek() == 'e' || peek() == 'E') {
            std::size_t mark = pos_ + 1;
            if (mark < src_.size() && (src_[mark] == '+' || src_[mark] == '-')) ++mark;
            if (mark < src_.size() && is_digit(src_[mark])) {
                pos_ = mark;
                while (is_digit(peek())) ++pos_;
            }
        }
        double value = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            fail("malformed number", start);
        return value;
    }
};

} // namespace detail

inline Expr parse(std::string_view source) { return detail::Parser(source).run(); }

} // namespace monodromy
