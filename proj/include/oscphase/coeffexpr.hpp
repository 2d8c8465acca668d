#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace oscphase {

namespace detail {

struct FnEntry {
    const char* name;
    double (*fn)(double);
};

inline constexpr FnEntry kFunctions[] = {
    {"sin", [](double x) { return std::sin(x); }},
    {"cos", [](double x) { return std::cos(x); }},
    {"exp", [](double x) { return std::exp(x); }},
    {"log", [](double x) { return std::log(x); }},
    {"sqrt", [](double x) { return std::sqrt(x); }},
    {"tanh", [](double x) { return std::tanh(x); }},
    {"abs", [](double x) { return std::fabs(x); }},
};

inline int function_index(std::string_view name) {
    for (int i = 0; i < int(std::size(kFunctions)); ++i)
        if (name == kFunctions[i].name) return i;
    return -1;
}

struct ExprNode {
    enum class Kind { number, var_t, var_omega, add, sub, mul, div, pow, neg, call };
    Kind kind;
    double value = 0.0;  // number
    int fn = -1;         // call
    std::unique_ptr<ExprNode> lhs, rhs;
};

using NodePtr = std::unique_ptr<ExprNode>;

inline NodePtr make_node(ExprNode::Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_unique<ExprNode>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

inline double eval_node(const ExprNode& n, double t, double omega) {
    using K = ExprNode::Kind;
    switch (n.kind) {
        case K::number: return n.value;
        case K::var_t: return t;
        case K::var_omega: return omega;
        case K::add: return eval_node(*n.lhs, t, omega) + eval_node(*n.rhs, t, omega);
        case K::sub: return eval_node(*n.lhs, t, omega) - eval_node(*n.rhs, t, omega);
        case K::mul: return eval_node(*n.lhs, t, omega) * eval_node(*n.rhs, t, omega);
        case K::div: return eval_node(*n.lhs, t, omega) / eval_node(*n.rhs, t, omega);
        case K::pow: return std::pow(eval_node(*n.lhs, t, omega), eval_node(*n.rhs, t, omega));
        case K::neg: return -eval_node(*n.lhs, t, omega);
        case K::call: return kFunctions[n.fn].fn(eval_node(*n.lhs, t, omega));
    }
    return 0.0;
}

inline void print_node(const ExprNode& n, std::string& out) {
    using K = ExprNode::Kind;
    switch (n.kind) {
        case K::number: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case K::var_t: out += 't'; return;
        case K::var_omega: out += "omega"; return;
        case K::neg:
            out += "(-";
            print_node(*n.lhs, out);
            out += ')';
            return;
        case K::call:
            out += kFunctions[n.fn].name;
            out += '(';
            print_node(*n.lhs, out);
            out += ')';
            return;
        default: {
            const char* op = n.kind == K::add   ? " + "
                             : n.kind == K::sub ? " - "
                             : n.kind == K::mul ? " * "
                             : n.kind == K::div ? " / "
                                                : " ^ ";
            out += '(';
            print_node(*n.lhs, out);
            out += op;
            print_node(*n.rhs, out);
            out += ')';
            return;
        }
    }
}

// Recursive descent over:
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | 't' | 'omega' | fn '(' expr ')' | '(' expr ')'
// ParseError carries the byte offset of the offending character.
class ExprParser {
public:
    explicit ExprParser(std::string_view src) : src_(src) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ < src_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }
    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            char c = peek();
            if (c == '+' || c == '-') {
                ++pos_;
                NodePtr rhs = parse_term();
                lhs = make_node(c == '+' ? ExprNode::Kind::add : ExprNode::Kind::sub,
                                std::move(lhs), std::move(rhs));
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            char c = peek();
            if (c == '*' || c == '/') {
                ++pos_;
                NodePtr rhs = parse_unary();
                lhs = make_node(c == '*' ? ExprNode::Kind::mul : ExprNode::Kind::div,
                                std::move(lhs), std::move(rhs));
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make_node(ExprNode::Kind::neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (consume('^')) {
            NodePtr exponent = parse_unary();
            return make_node(ExprNode::Kind::pow, std::move(base), std::move(exponent));
        }
        return base;
    }

    NodePtr parse_primary() {
        char c = peek();
        std::size_t at = pos_;
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            if (!consume(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            std::string_view name = src_.substr(start, pos_ - start);
            if (name == "t") return make_node(ExprNode::Kind::var_t);
            if (name == "omega") return make_node(ExprNode::Kind::var_omega);
            int fn = function_index(name);
            if (fn >= 0) {
                if (!consume('(')) throw ParseError("expected '(' after function name", pos_);
                NodePtr arg = parse_expr();
                if (!consume(')')) throw ParseError("expected ')'", pos_);
                auto node = make_node(ExprNode::Kind::call, std::move(arg));
                node->fn = fn;
                return node;
            }
            throw ParseError("unknown identifier '" + std::string(name) + "'", start);
        }
        throw ParseError(pos_ >= src_.size() ? "unexpected end of input"
                                             : std::string("unexpected character '") + c + "'",
                         at);
    }

    NodePtr parse_number() {
        double v = 0.0;
        const char* first = src_.data() + pos_;
        const char* last = src_.data() + src_.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr == first) throw ParseError("malformed number", pos_);
        pos_ += std::size_t(ptr - first);
        auto node = make_node(ExprNode::Kind::number);
        node->value = v;
        return node;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// How the coefficient q(t, omega) of y'' + omega^2 q y = 0 is supplied:
// a parsed expression, a built-in catalog entry, or a caller callback.
// Immutable and cheap to copy; evaluation is pure and deterministic.
//
// Catalog entries (the frequency is folded into q via the degree n, so these
// are meant to be solved with omega = 1):
//   legendre   (param n):         1/(1-t^2)^2 + n(n+1)/(1-t^2)
//   gegenbauer (params n, alpha): (a-a^2+3/4)/(1-t^2)^2 + (n+a-1/2)(n+a+1/2)/(1-t^2)
//   bvp        (no params):      (3t^2 w^2 + t^2 w + 1)/(-(t^2+1)w + w^2 + 1) + 2e^-t/(t^2+1/10)
class CoefficientSpec {
public:
    using Callback = std::function<double(double, double)>;
    enum class Kind { expression, catalog, callback };

    static CoefficientSpec parse(std::string_view source) {
        CoefficientSpec s;
        s.kind_ = Kind::expression;
        s.ast_ = std::shared_ptr<const detail::ExprNode>(detail::ExprParser(source).parse().release());
        return s;
    }

    static CoefficientSpec catalog(const std::string& id,
                                   const std::map<std::string, double>& params = {}) {
        CoefficientSpec s;
        s.kind_ = Kind::catalog;
        auto take = [&params](const char* name) {
            auto it = params.find(name);
            if (it == params.end())
                throw InvalidConfig(std::string("catalog: missing parameter '") + name + "'");
            return it->second;
        };
        if (id == "legendre") {
            s.catalog_ = Catalog::legendre;
            s.n_ = take("n");
            if (!(s.n_ >= 0.0)) throw InvalidConfig("catalog legendre: n must be >= 0");
        } else if (id == "gegenbauer") {
            s.catalog_ = Catalog::gegenbauer;
            s.n_ = take("n");
            s.order_ = take("alpha");
            if (!(s.n_ >= 0.0)) throw InvalidConfig("catalog gegenbauer: n must be >= 0");
            if (!(s.order_ > -0.5)) throw InvalidConfig("catalog gegenbauer: alpha must exceed -1/2");
        } else if (id == "bvp") {
            s.catalog_ = Catalog::bvp;
        } else {
            throw InvalidConfig("catalog: unknown entry '" + id + "'");
        }
        return s;
    }

    static CoefficientSpec callback(Callback fn) {
        CoefficientSpec s;
        s.kind_ = Kind::callback;
        s.cb_ = std::move(fn);
        return s;
    }

    Kind kind() const { return kind_; }

    double eval(double t, double omega) const {
        double v = eval_raw(t, omega);
        if (!std::isfinite(v))
            throw NumericFailure("coefficient evaluation not finite at t = " + std::to_string(t));
        return v;
    }

    // Printable form of a parsed expression; re-parsing it reproduces the AST
    // up to evaluation.
    std::string pretty() const {
        if (kind_ != Kind::expression) throw InvalidConfig("pretty(): not an expression spec");
        std::string out;
        detail::print_node(*ast_, out);
        return out;
    }

private:
    enum class Catalog { none, legendre, gegenbauer, bvp };

    double eval_raw(double t, double omega) const {
        switch (kind_) {
            case Kind::expression: return detail::eval_node(*ast_, t, omega);
            case Kind::callback: return cb_(t, omega);
            case Kind::catalog: break;
        }
        // (1-t^2) via (1-t)(1+t); the naive form loses ~6 digits near t = 1.
        double s = (1.0 - t) * (1.0 + t);
        switch (catalog_) {
            case Catalog::legendre:
                if (s == 0.0) throw NumericFailure("legendre coefficient: pole at t = +-1");
                return 1.0 / (s * s) + n_ * (n_ + 1.0) / s;
            case Catalog::gegenbauer: {
                if (s == 0.0) throw NumericFailure("gegenbauer coefficient: pole at t = +-1");
                double a = order_;
                return (a - a * a + 0.75) / (s * s) + (n_ + a - 0.5) * (n_ + a + 0.5) / s;
            }
            case Catalog::bvp: {
                double den = -(t * t + 1.0) * omega + omega * omega + 1.0;
                return (3.0 * t * t * omega * omega + t * t * omega + 1.0) / den +
                       2.0 * std::exp(-t) / (t * t + 0.1);
            }
            case Catalog::none: break;
        }
        throw InvalidConfig("CoefficientSpec: not initialized");
    }

    Kind kind_ = Kind::expression;
    std::shared_ptr<const detail::ExprNode> ast_;
    Catalog catalog_ = Catalog::none;
    double n_ = 0.0, order_ = 0.0;
    Callback cb_;
};

inline CoefficientSpec parse(std::string_view source) { return CoefficientSpec::parse(source); }

inline double eval_q(const CoefficientSpec& spec, double t, double omega) {
    return spec.eval(t, omega);
}

}  // namespace oscphase
