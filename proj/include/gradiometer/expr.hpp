#pragma once

// Symbolic scalar expressions over a coordinate chart: construction,
// parsing, differentiation, simplification and pointwise evaluation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gradiometer {

struct Interval {
    double lo = -1.0;
    double hi = 1.0;
};

// A single coordinate chart standing in for the state manifold.
class Chart {
public:
    Chart() = default;

    explicit Chart(std::vector<std::string> names)
        : names_(std::move(names)), box_(names_.size()) {
        validate();
    }

    Chart(std::vector<std::string> names, std::vector<Interval> box)
        : names_(std::move(names)), box_(std::move(box)) {
        if (box_.size() != names_.size())
            throw std::invalid_argument("chart: box size != dimension");
        validate();
    }

    int dim() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }
    const Interval& box(int i) const { return box_.at(i); }
    const std::vector<Interval>& box() const { return box_; }

    void set_box(std::vector<Interval> box) {
        if (box.size() != names_.size())
            throw std::invalid_argument("chart: box size != dimension");
        for (const auto& iv : box)
            if (!(iv.lo <= iv.hi)) throw std::invalid_argument("chart: empty interval");
        box_ = std::move(box);
    }

    int index_of(const std::string& name) const {
        for (int i = 0; i < dim(); ++i)
            if (names_[i] == name) return i;
        return -1;
    }

    bool same_coordinates(const Chart& other) const { return names_ == other.names_; }

    // Deterministic uniform samples on the box. The generator is hand-rolled
    // from mt19937_64 output so point streams are identical across platforms.
    std::vector<std::vector<double>> sample_points(int count, std::uint64_t seed) const;

private:
    void validate() const {
        if (names_.empty()) throw std::invalid_argument("chart: dimension must be >= 1");
        for (int i = 0; i < dim(); ++i) {
            if (names_[i].empty()) throw std::invalid_argument("chart: empty coordinate name");
            for (int j = i + 1; j < dim(); ++j)
                if (names_[i] == names_[j])
                    throw std::invalid_argument("chart: duplicate coordinate name " + names_[i]);
        }
        for (const auto& iv : box_)
            if (!(iv.lo <= iv.hi)) throw std::invalid_argument("chart: empty interval");
    }

    std::vector<std::string> names_;
    std::vector<Interval> box_;
};

namespace detail {

class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

} // namespace detail

inline std::vector<std::vector<double>> Chart::sample_points(int count, std::uint64_t seed) const {
    detail::SplitMix rng(seed);
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim()));
    for (auto& p : pts)
        for (int i = 0; i < dim(); ++i)
            p[i] = box_[i].lo + rng.uniform() * (box_[i].hi - box_[i].lo);
    return pts;
}

struct EvalError : std::runtime_error {
    EvalError(const std::string& msg, std::string subterm_, std::vector<double> point_)
        : std::runtime_error(msg), subterm(std::move(subterm_)), point(std::move(point_)) {}
    std::string subterm;
    std::vector<double> point;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t offset_)
        : std::runtime_error(msg + " at offset " + std::to_string(offset_)), offset(offset_) {}
    std::size_t offset;
};

inline std::string format_number(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

enum class NodeKind { Constant, Variable, Sum, Product, Power, Func };
enum class FuncKind { Exp, Log, Sin, Cos, Tan, Sqrt };

inline const char* func_name(FuncKind f) {
    switch (f) {
        case FuncKind::Exp: return "exp";
        case FuncKind::Log: return "log";
        case FuncKind::Sin: return "sin";
        case FuncKind::Cos: return "cos";
        case FuncKind::Tan: return "tan";
        case FuncKind::Sqrt: return "sqrt";
    }
    return "?";
}

// Immutable expression tree with shared subterms.
class Expression {
public:
    struct Node {
        NodeKind kind;
        double value = 0.0;          // Constant
        int var_index = -1;          // Variable
        std::string var_name;        // Variable
        std::vector<Expression> children; // Sum, Product, Func arg, Power base
        long long exponent = 1;      // Power
        FuncKind func = FuncKind::Exp;
        std::size_t hash = 0;
    };

    Expression() : Expression(0.0) {}

    /*implicit*/ Expression(double v) { node_ = make(NodeKind::Constant, [&](Node& n) { n.value = v; }); }

    static Expression variable(int index, std::string name) {
        return Expression(make(NodeKind::Variable, [&](Node& n) {
            n.var_index = index;
            n.var_name = std::move(name);
        }));
    }

    static Expression variable(const Chart& chart, int index) {
        return variable(index, chart.name(index));
    }

    static Expression sum(std::vector<Expression> terms);
    static Expression product(std::vector<Expression> factors);
    static Expression power(Expression base, long long exponent);
    static Expression apply(FuncKind f, Expression arg) {
        return Expression(make(NodeKind::Func, [&](Node& n) {
            n.func = f;
            n.children = {std::move(arg)};
        }));
    }

    NodeKind kind() const { return node_->kind; }
    double value() const { return node_->value; }
    int var_index() const { return node_->var_index; }
    const std::string& var_name() const { return node_->var_name; }
    const std::vector<Expression>& children() const { return node_->children; }
    long long exponent() const { return node_->exponent; }
    FuncKind func() const { return node_->func; }
    std::size_t hash() const { return node_->hash; }

    bool is_constant(double v) const {
        return node_->kind == NodeKind::Constant && node_->value == v;
    }
    bool is_constant() const { return node_->kind == NodeKind::Constant; }

    double evaluate(std::span<const double> point) const;
    std::string str() const {
        std::ostringstream os;
        print(os, 0);
        return os.str();
    }

    friend bool struct_equal(const Expression& a, const Expression& b);
    friend int struct_compare(const Expression& a, const Expression& b);

private:
    explicit Expression(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    template <class Fill>
    static std::shared_ptr<const Node> make(NodeKind kind, Fill&& fill) {
        auto n = std::make_shared<Node>();
        n->kind = kind;
        fill(*n);
        n->hash = compute_hash(*n);
        return n;
    }

    static std::size_t compute_hash(const Node& n);
    // precedence levels: 0 sum, 1 product, 2 unary/power
    void print(std::ostream& os, int parent_prec) const;

    std::shared_ptr<const Node> node_;
};

inline std::size_t Expression::compute_hash(const Node& n) {
    auto mix = [](std::size_t h, std::size_t v) {
        return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    };
    std::size_t h = static_cast<std::size_t>(n.kind) * 0x9e3779b1ULL;
    switch (n.kind) {
        case NodeKind::Constant: h = mix(h, std::hash<double>{}(n.value)); break;
        case NodeKind::Variable: h = mix(h, std::hash<std::string>{}(n.var_name)); break;
        case NodeKind::Power: h = mix(h, static_cast<std::size_t>(n.exponent)); break;
        case NodeKind::Func: h = mix(h, static_cast<std::size_t>(n.func)); break;
        default: break;
    }
    for (const auto& c : n.children) h = mix(h, c.hash());
    return h;
}

inline int struct_compare(const Expression& a, const Expression& b) {
    if (a.node_ == b.node_) return 0;
    if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
    switch (a.kind()) {
        case NodeKind::Constant:
            if (a.value() != b.value()) return a.value() < b.value() ? -1 : 1;
            return 0;
        case NodeKind::Variable:
            return a.var_name().compare(b.var_name());
        case NodeKind::Power:
            if (a.exponent() != b.exponent()) return a.exponent() < b.exponent() ? -1 : 1;
            break;
        case NodeKind::Func:
            if (a.func() != b.func()) return a.func() < b.func() ? -1 : 1;
            break;
        default: break;
    }
    const auto& ca = a.children();
    const auto& cb = b.children();
    if (ca.size() != cb.size()) return ca.size() < cb.size() ? -1 : 1;
    for (std::size_t i = 0; i < ca.size(); ++i)
        if (int c = struct_compare(ca[i], cb[i]); c != 0) return c;
    return 0;
}

inline bool struct_equal(const Expression& a, const Expression& b) {
    if (a.node_ == b.node_) return true;
    if (a.hash() != b.hash()) return false;
    return struct_compare(a, b) == 0;
}

inline Expression Expression::sum(std::vector<Expression> terms) {
    if (terms.empty()) return Expression(0.0);
    if (terms.size() == 1) return terms[0];
    return Expression(make(NodeKind::Sum, [&](Node& n) { n.children = std::move(terms); }));
}

inline Expression Expression::product(std::vector<Expression> factors) {
    if (factors.empty()) return Expression(1.0);
    if (factors.size() == 1) return factors[0];
    return Expression(make(NodeKind::Product, [&](Node& n) { n.children = std::move(factors); }));
}

inline Expression Expression::power(Expression base, long long exponent) {
    if (exponent == 1) return base;
    return Expression(make(NodeKind::Power, [&](Node& n) {
        n.children = {std::move(base)};
        n.exponent = exponent;
    }));
}

// Light algebraic shortcuts at construction keep intermediate trees small;
// the full rewrite lives in simplify().
inline Expression operator+(const Expression& a, const Expression& b) {
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    if (a.is_constant() && b.is_constant()) return Expression(a.value() + b.value());
    return Expression::sum({a, b});
}

inline Expression operator*(const Expression& a, const Expression& b) {
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expression(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant() && b.is_constant()) return Expression(a.value() * b.value());
    return Expression::product({a, b});
}

inline Expression operator-(const Expression& a) { return Expression(-1.0) * a; }
inline Expression operator-(const Expression& a, const Expression& b) { return a + (-b); }

inline Expression operator/(const Expression& a, const Expression& b) {
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expression(0.0);
    return a * Expression::power(b, -1);
}

inline Expression exp(const Expression& e) { return Expression::apply(FuncKind::Exp, e); }
inline Expression log(const Expression& e) { return Expression::apply(FuncKind::Log, e); }
inline Expression sin(const Expression& e) { return Expression::apply(FuncKind::Sin, e); }
inline Expression cos(const Expression& e) { return Expression::apply(FuncKind::Cos, e); }
inline Expression tan(const Expression& e) { return Expression::apply(FuncKind::Tan, e); }
inline Expression sqrt(const Expression& e) { return Expression::apply(FuncKind::Sqrt, e); }
inline Expression pow(const Expression& e, long long k) { return Expression::power(e, k); }

inline double Expression::evaluate(std::span<const double> point) const {
    auto fail = [&](const std::string& msg) -> double {
        throw EvalError(msg + " in " + str(), str(),
                        std::vector<double>(point.begin(), point.end()));
    };
    switch (kind()) {
        case NodeKind::Constant: return value();
        case NodeKind::Variable:
            if (var_index() < 0 || var_index() >= static_cast<int>(point.size()))
                return fail("variable index out of range");
            return point[var_index()];
        case NodeKind::Sum: {
            double s = 0.0;
            for (const auto& c : children()) s += c.evaluate(point);
            return s;
        }
        case NodeKind::Product: {
            double p = 1.0;
            for (const auto& c : children()) p *= c.evaluate(point);
            return p;
        }
        case NodeKind::Power: {
            double b = children()[0].evaluate(point);
            if (b == 0.0 && exponent() < 0) return fail("division by zero");
            double r = std::pow(b, static_cast<double>(exponent()));
            if (!std::isfinite(r)) return fail("non-finite power");
            return r;
        }
        case NodeKind::Func: {
            double x = children()[0].evaluate(point);
            double r = 0.0;
            switch (func()) {
                case FuncKind::Exp: r = std::exp(x); break;
                case FuncKind::Log:
                    if (x <= 0.0) return fail("log of non-positive value");
                    r = std::log(x);
                    break;
                case FuncKind::Sin: r = std::sin(x); break;
                case FuncKind::Cos: r = std::cos(x); break;
                case FuncKind::Tan: r = std::tan(x); break;
                case FuncKind::Sqrt:
                    if (x < 0.0) return fail("sqrt of negative value");
                    r = std::sqrt(x);
                    break;
            }
            if (!std::isfinite(r)) return fail("non-finite function value");
            return r;
        }
    }
    return fail("corrupt node");
}

inline void Expression::print(std::ostream& os, int parent_prec) const {
    switch (kind()) {
        case NodeKind::Constant: {
            double v = value();
            if (v < 0.0 && parent_prec > 0) {
                os << '(';
                os << format_number(v);
                os << ')';
            } else {
                os << format_number(v);
            }
            break;
        }
        case NodeKind::Variable: os << var_name(); break;
        case NodeKind::Sum: {
            if (parent_prec > 0) os << '(';
            bool first = true;
            for (const auto& c : children()) {
                // negative leading coefficient prints as subtraction
                bool neg = false;
                Expression t = c;
                if (c.kind() == NodeKind::Constant && c.value() < 0) {
                    neg = true;
                    t = Expression(-c.value());
                } else if (c.kind() == NodeKind::Product && !c.children().empty() &&
                           c.children()[0].is_constant() && c.children()[0].value() < 0) {
                    neg = true;
                    std::vector<Expression> fs(c.children().begin(), c.children().end());
                    fs[0] = Expression(-fs[0].value());
                    if (fs[0].is_constant(1.0)) fs.erase(fs.begin());
                    t = Expression::product(std::move(fs));
                }
                if (first) {
                    if (neg) os << '-';
                    first = false;
                } else {
                    os << (neg ? " - " : " + ");
                }
                t.print(os, 1);
            }
            if (parent_prec > 0) os << ')';
            break;
        }
        case NodeKind::Product: {
            // leading -1 prints as unary minus where precedence allows
            if (!children().empty() && children()[0].is_constant(-1.0) &&
                children().size() > 1 && parent_prec == 0) {
                os << '-';
                std::vector<Expression> rest(children().begin() + 1, children().end());
                Expression::product(std::move(rest)).print(os, 1);
                break;
            }
            if (parent_prec > 1) os << '(';
            bool first = true;
            for (const auto& c : children()) {
                // negative integer powers print as division
                if (!first && c.kind() == NodeKind::Power && c.exponent() < 0) {
                    os << '/';
                    if (c.exponent() == -1) {
                        c.children()[0].print(os, 2);
                    } else {
                        c.children()[0].print(os, 2);
                        // reciprocal of a higher power needs the exponent back
                        os << '^' << -c.exponent();
                    }
                    continue;
                }
                if (!first) os << '*';
                first = false;
                c.print(os, 2);
            }
            if (parent_prec > 1) os << ')';
            break;
        }
        case NodeKind::Power: {
            if (exponent() < 0) {
                os << "1/";
                children()[0].print(os, 2);
                if (exponent() != -1) os << '^' << -exponent();
            } else {
                children()[0].print(os, 2);
                os << '^' << exponent();
            }
            break;
        }
        case NodeKind::Func:
            os << func_name(func()) << '(';
            children()[0].print(os, 0);
            os << ')';
            break;
    }
}

// ---------------------------------------------------------------------------
// simplify: conservative bottom-up rewrite. Constant folding, 0/1 identities,
// flattening of sums and products, like-term and like-factor collection with
// a deterministic term order. Idempotent by construction of the term order.

namespace detail {

inline std::pair<double, Expression> split_coeff(const Expression& e) {
    if (e.kind() == NodeKind::Constant) return {e.value(), Expression(1.0)};
    if (e.kind() == NodeKind::Product) {
        double c = 1.0;
        std::vector<Expression> rest;
        for (const auto& f : e.children()) {
            if (f.is_constant())
                c *= f.value();
            else
                rest.push_back(f);
        }
        if (rest.empty()) return {c, Expression(1.0)};
        return {c, Expression::product(std::move(rest))};
    }
    return {1.0, e};
}

inline std::pair<Expression, long long> split_power(const Expression& e) {
    if (e.kind() == NodeKind::Power) return {e.children()[0], e.exponent()};
    return {e, 1};
}

struct ExprLess {
    bool operator()(const Expression& a, const Expression& b) const {
        return struct_compare(a, b) < 0;
    }
};

} // namespace detail

inline Expression simplify(const Expression& e);

namespace detail {

inline Expression simplify_sum(const std::vector<Expression>& terms) {
    std::vector<Expression> flat;
    for (const auto& t : terms) {
        Expression s = simplify(t);
        if (s.kind() == NodeKind::Sum)
            flat.insert(flat.end(), s.children().begin(), s.children().end());
        else
            flat.push_back(s);
    }
    double constant = 0.0;
    std::map<Expression, double, ExprLess> collected;
    for (const auto& t : flat) {
        auto [c, rest] = split_coeff(t);
        // distribute a constant coefficient over an inner sum
        if (rest.kind() == NodeKind::Sum) {
            for (const auto& u : rest.children()) {
                auto [c2, r2] = split_coeff(u);
                if (r2.is_constant(1.0))
                    constant += c * c2;
                else
                    collected[r2] += c * c2;
            }
            continue;
        }
        if (rest.is_constant(1.0))
            constant += c;
        else
            collected[rest] += c;
    }
    std::vector<Expression> out;
    for (const auto& [rest, c] : collected) {
        if (c == 0.0) continue;
        if (c == 1.0)
            out.push_back(rest);
        else
            out.push_back(Expression::product({Expression(c), rest}));
    }
    if (constant != 0.0 || out.empty()) out.insert(out.begin(), Expression(constant));
    return Expression::sum(std::move(out));
}

inline Expression simplify_product(const std::vector<Expression>& factors) {
    std::vector<Expression> flat;
    for (const auto& f : factors) {
        Expression s = simplify(f);
        if (s.kind() == NodeKind::Product)
            flat.insert(flat.end(), s.children().begin(), s.children().end());
        else
            flat.push_back(s);
    }
    double constant = 1.0;
    std::map<Expression, long long, ExprLess> powers;
    for (const auto& f : flat) {
        if (f.is_constant()) {
            constant *= f.value();
            continue;
        }
        auto [base, k] = split_power(f);
        powers[base] += k;
    }
    if (constant == 0.0) return Expression(0.0);
    std::vector<Expression> out;
    std::vector<Expression> exp_args; // exp factors merge into one
    for (const auto& [base, k] : powers) {
        if (k == 0) continue;
        if (base.kind() == NodeKind::Func && base.func() == FuncKind::Exp) {
            exp_args.push_back(Expression(static_cast<double>(k)) * base.children()[0]);
            continue;
        }
        out.push_back(Expression::power(base, k));
    }
    if (!exp_args.empty()) {
        Expression arg = simplify(Expression::sum(std::move(exp_args)));
        if (!arg.is_constant(0.0))
            out.push_back(Expression::apply(FuncKind::Exp, std::move(arg)));
    }
    if (out.empty()) return Expression(constant);
    if (constant != 1.0) out.insert(out.begin(), Expression(constant));
    return Expression::product(std::move(out));
}

} // namespace detail

inline Expression simplify(const Expression& e) {
    switch (e.kind()) {
        case NodeKind::Constant:
        case NodeKind::Variable:
            return e;
        case NodeKind::Sum:
            return detail::simplify_sum(e.children());
        case NodeKind::Product:
            return detail::simplify_product(e.children());
        case NodeKind::Power: {
            Expression b = simplify(e.children()[0]);
            long long k = e.exponent();
            if (k == 0) return Expression(1.0);
            if (k == 1) return b;
            if (b.is_constant()) {
                double r = std::pow(b.value(), static_cast<double>(k));
                if (std::isfinite(r)) return Expression(r);
            }
            if (b.kind() == NodeKind::Power)
                return Expression::power(b.children()[0], b.exponent() * k);
            if (b.kind() == NodeKind::Func && b.func() == FuncKind::Exp)
                return Expression::apply(
                    FuncKind::Exp,
                    simplify(Expression(static_cast<double>(k)) * b.children()[0]));
            if (b.kind() == NodeKind::Product) {
                std::vector<Expression> fs;
                for (const auto& f : b.children()) fs.push_back(Expression::power(f, k));
                return detail::simplify_product(fs);
            }
            return Expression::power(std::move(b), k);
        }
        case NodeKind::Func: {
            Expression a = simplify(e.children()[0]);
            if (a.is_constant()) {
                double x = a.value();
                double r = std::numeric_limits<double>::quiet_NaN();
                switch (e.func()) {
                    case FuncKind::Exp: r = std::exp(x); break;
                    case FuncKind::Log: r = x > 0 ? std::log(x) : r; break;
                    case FuncKind::Sin: r = std::sin(x); break;
                    case FuncKind::Cos: r = std::cos(x); break;
                    case FuncKind::Tan: r = std::tan(x); break;
                    case FuncKind::Sqrt: r = x >= 0 ? std::sqrt(x) : r; break;
                }
                if (std::isfinite(r)) return Expression(r);
            }
            return Expression::apply(e.func(), std::move(a));
        }
    }
    return e;
}

// ---------------------------------------------------------------------------
// differentiate: exact symbolic partial derivative w.r.t. a coordinate index.

inline Expression differentiate(const Expression& e, int var_index) {
    switch (e.kind()) {
        case NodeKind::Constant: return Expression(0.0);
        case NodeKind::Variable: return Expression(e.var_index() == var_index ? 1.0 : 0.0);
        case NodeKind::Sum: {
            std::vector<Expression> terms;
            for (const auto& c : e.children()) terms.push_back(differentiate(c, var_index));
            return simplify(Expression::sum(std::move(terms)));
        }
        case NodeKind::Product: {
            std::vector<Expression> terms;
            const auto& fs = e.children();
            for (std::size_t i = 0; i < fs.size(); ++i) {
                Expression d = differentiate(fs[i], var_index);
                if (d.is_constant(0.0)) continue;
                std::vector<Expression> prod;
                for (std::size_t j = 0; j < fs.size(); ++j) prod.push_back(j == i ? d : fs[j]);
                terms.push_back(Expression::product(std::move(prod)));
            }
            return simplify(Expression::sum(std::move(terms)));
        }
        case NodeKind::Power: {
            const Expression& b = e.children()[0];
            Expression db = differentiate(b, var_index);
            if (db.is_constant(0.0)) return Expression(0.0);
            return simplify(Expression(static_cast<double>(e.exponent())) *
                            Expression::power(b, e.exponent() - 1) * db);
        }
        case NodeKind::Func: {
            const Expression& a = e.children()[0];
            Expression da = differentiate(a, var_index);
            if (da.is_constant(0.0)) return Expression(0.0);
            Expression outer = Expression(0.0);
            switch (e.func()) {
                case FuncKind::Exp: outer = exp(a); break;
                case FuncKind::Log: outer = Expression(1.0) / a; break;
                case FuncKind::Sin: outer = cos(a); break;
                case FuncKind::Cos: outer = -sin(a); break;
                case FuncKind::Tan: outer = Expression(1.0) / (cos(a) * cos(a)); break;
                case FuncKind::Sqrt: outer = Expression(0.5) / sqrt(a); break;
            }
            return simplify(outer * da);
        }
    }
    return Expression(0.0);
}

inline Expression differentiate(const Expression& e, const Chart& chart,
                                const std::string& coord) {
    int i = chart.index_of(coord);
    if (i < 0) throw std::invalid_argument("unknown coordinate: " + coord);
    return differentiate(e, i);
}

// ---------------------------------------------------------------------------
// Numeric equivalence on a seeded sample set.

struct SampleCheck {
    bool ok = true;
    double max_residual = 0.0;
    std::vector<double> witness;
};

constexpr std::uint64_t kDefaultSeed = 42;

inline SampleCheck equivalent_on_samples(const Expression& a, const Expression& b,
                                         const Chart& chart, double tol = 1e-8,
                                         int count = 64, std::uint64_t seed = kDefaultSeed) {
    if (count < 1) throw std::invalid_argument("sample count must be >= 1");
    SampleCheck res;
    for (const auto& p : chart.sample_points(count, seed)) {
        double va = a.evaluate(p);
        double vb = b.evaluate(p);
        double r = std::abs(va - vb);
        if (r > res.max_residual) {
            res.max_residual = r;
            if (r > tol * (1.0 + std::abs(va))) res.witness = p;
        }
        if (r > tol * (1.0 + std::abs(va))) res.ok = false;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser for the expression grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' ['-'] integer)?
//   base   := number | ident | '(' expr ')' | func '(' expr ')'

namespace detail {

class Parser {
public:
    Parser(std::string_view src, const Chart& chart) : src_(src), chart_(chart) {}

    Expression parse() {
        Expression e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    Expression parse_expr() {
        skip_ws();
        bool neg = false;
        if (peek() == '-') {
            neg = true;
            ++pos_;
        } else if (peek() == '+') {
            ++pos_;
        }
        Expression e = parse_term();
        if (neg) e = -e;
        for (;;) {
            skip_ws();
            char c = peek();
            if (c == '+' || c == '-') {
                ++pos_;
                Expression t = parse_term();
                e = (c == '+') ? e + t : e - t;
            } else {
                return e;
            }
        }
    }

    Expression parse_term() {
        Expression e = parse_factor();
        for (;;) {
            skip_ws();
            char c = peek();
            if (c == '*' || c == '/') {
                ++pos_;
                Expression f = parse_factor();
                e = (c == '*') ? e * f : e / f;
            } else {
                return e;
            }
        }
    }

    Expression parse_factor() {
        Expression b = parse_base();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            skip_ws();
            bool neg = false;
            if (peek() == '-') {
                neg = true;
                ++pos_;
            }
            std::size_t start = pos_;
            long long k = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                k = k * 10 + (src_[pos_++] - '0');
            if (pos_ == start) throw ParseError("expected integer exponent", pos_);
            return Expression::power(b, neg ? -k : k);
        }
        return b;
    }

    Expression parse_base() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expression e = parse_expr();
            skip_ws();
            if (peek() != ')') throw ParseError("expected ')'", pos_);
            ++pos_;
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expression parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark; // not an exponent, e.g. "2e" where e is not defined anyway
            }
        }
        try {
            return Expression(std::stod(std::string(src_.substr(start, pos_ - start))));
        } catch (const std::exception&) {
            throw ParseError("malformed number", start);
        }
    }

    Expression parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        static const std::map<std::string, FuncKind> funcs = {
            {"exp", FuncKind::Exp}, {"log", FuncKind::Log},  {"sin", FuncKind::Sin},
            {"cos", FuncKind::Cos}, {"tan", FuncKind::Tan},  {"sqrt", FuncKind::Sqrt}};
        skip_ws();
        if (auto it = funcs.find(name); it != funcs.end()) {
            if (peek() != '(') throw ParseError("expected '(' after function " + name, pos_);
            ++pos_;
            Expression arg = parse_expr();
            skip_ws();
            if (peek() != ')') throw ParseError("expected ')'", pos_);
            ++pos_;
            return Expression::apply(it->second, std::move(arg));
        }
        int idx = chart_.index_of(name);
        if (idx < 0) throw ParseError("unknown identifier '" + name + "'", start);
        return Expression::variable(idx, name);
    }

    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    std::string_view src_;
    const Chart& chart_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Expression parse_expr(std::string_view source, const Chart& chart) {
    return detail::Parser(source, chart).parse();
}

} // namespace gradiometer
