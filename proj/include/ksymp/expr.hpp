#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

#include "ksymp/errors.hpp"

namespace ksymp {

using Bindings = std::unordered_map<std::string, double>;

enum class ExprKind {
    Constant,
    Variable,
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Add,
    Sub,
    Mul,
    Div,
    Pow, // base ^ constant exponent
};

namespace detail {
struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;
} // namespace detail

/// Immutable symbolic expression over named real variables.
///
/// Values are shared-pointer handles to immutable trees, so copies are cheap
/// and instances may be evaluated concurrently. Evaluation is total on
/// bindings covering every free variable; domain violations raise EvalError
/// rather than producing NaN. Power nodes carry a constant real exponent;
/// fractional exponents of non-positive bases are evaluation errors.
class Expr {
public:
    /// Defaults to the constant 0.
    Expr();

    static Expr constant(double value);
    static Expr variable(std::string name);
    static Expr neg(Expr e);
    static Expr sin(Expr e);
    static Expr cos(Expr e);
    static Expr exp(Expr e);
    static Expr log(Expr e);
    static Expr sqrt(Expr e);
    static Expr add(Expr a, Expr b);
    static Expr sub(Expr a, Expr b);
    static Expr mul(Expr a, Expr b);
    static Expr div(Expr a, Expr b);
    static Expr pow(Expr base, double exponent);

    /// Parse infix text. Grammar: `+ - * / ^` with standard precedence
    /// (pow > unary minus > mul/div > add/sub, left-associative), function
    /// call syntax for sin/cos/exp/log/sqrt, identifiers
    /// `[A-Za-z][A-Za-z0-9_]*`. The right operand of `^` must fold to a
    /// constant.
    static Expr parse(std::string_view text);

    ExprKind kind() const;

    /// True when the node is a literal constant; writes the value if asked.
    bool is_constant(double* value = nullptr) const;

    double eval(const Bindings& bindings) const;

    /// Exact symbolic partial derivative with respect to `var`; all other
    /// variables are treated as independent.
    Expr diff(const std::string& var) const;

    /// Value-preserving rewrite: neutral/annihilator elimination and constant
    /// folding. No normal form is promised, only that evaluation agrees with
    /// the original wherever the original evaluates.
    Expr simplified() const;

    /// Replace variables by expressions (simultaneous substitution).
    Expr substitute(const std::unordered_map<std::string, Expr>& map) const;

    std::set<std::string> free_variables() const;

    /// Render in the input grammar; parsing the result yields an
    /// evaluation-equivalent expression.
    std::string str() const;

    friend Expr operator+(const Expr& a, const Expr& b) { return add(a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return sub(a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return mul(a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return div(a, b); }
    friend Expr operator-(const Expr& a) { return neg(a); }

private:
    explicit Expr(detail::NodePtr node);
    detail::NodePtr node_;
};

/// Shortest decimal rendering of `x` that parses back to the same double.
std::string format_double(double x);

} // namespace ksymp
