#pragma once

// Infix expression language for media g(x, t).
//
// Grammar (lowest to highest precedence):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'pi' | variable | func '(' expr [',' expr] ')' | '(' expr ')'
//
// Variables are x1..xn and t; x and y alias x1 and x2 when n <= 2.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace hele_homog {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : std::runtime_error(fmt::format("parse error at offset {}: {}", offset, what)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

enum class Op : unsigned char {
    Number,
    Pi,
    Var,   // spatial coordinate, index in `var`
    Time,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Min,
    Max,
};

constexpr int arity(Op op) noexcept {
    switch (op) {
    case Op::Number:
    case Op::Pi:
    case Op::Var:
    case Op::Time: return 0;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sqrt:
    case Op::Abs: return 1;
    default: return 2;
    }
}

struct ExprNode {
    Op op{Op::Number};
    double value{0.0};
    int var{0};
    int lhs{-1};
    int rhs{-1};
};

namespace detail {

struct FunctionInfo {
    std::string_view name;
    Op op;
};

inline constexpr std::array<FunctionInfo, 7> kFunctions{{
    {"sin", Op::Sin},
    {"cos", Op::Cos},
    {"exp", Op::Exp},
    {"sqrt", Op::Sqrt},
    {"abs", Op::Abs},
    {"min", Op::Min},
    {"max", Op::Max},
}};

inline std::string_view function_name(Op op) {
    for (const auto& f : kFunctions)
        if (f.op == op) return f.name;
    return {};
}

}  // namespace detail

/// Parsed expression tree over x1..xn and t, stored as an index arena.
class MediumExpr {
public:
    MediumExpr() = default;

    int dim() const noexcept { return dim_; }
    const std::vector<ExprNode>& nodes() const noexcept { return nodes_; }
    int root() const noexcept { return root_; }

    bool is_constant() const {
        for (const auto& n : nodes_)
            if (n.op == Op::Var || n.op == Op::Time) return false;
        return true;
    }

    bool uses_time() const {
        for (const auto& n : nodes_)
            if (n.op == Op::Time) return true;
        return false;
    }

    bool uses_axis(int axis) const {
        for (const auto& n : nodes_)
            if (n.op == Op::Var && n.var == axis) return true;
        return false;
    }

    /// Same tree, declared in a higher spatial dimension (extends constantly in new axes).
    MediumExpr with_dim(int dim) const {
        if (dim < dim_) throw std::invalid_argument("with_dim: cannot lower the dimension");
        MediumExpr out = *this;
        out.dim_ = dim;
        return out;
    }

    /// Structural equality of the trees reachable from the roots.
    friend bool operator==(const MediumExpr& a, const MediumExpr& b) {
        if (a.dim_ != b.dim_) return false;
        return same_subtree(a, a.root_, b, b.root_);
    }

    /// Canonical source text; parse(to_string(e), e.dim()) == e.
    std::string to_string() const { return print(root_); }

private:
    friend class ExprParser;

    static bool same_subtree(const MediumExpr& a, int ia, const MediumExpr& b, int ib) {
        if (ia < 0 || ib < 0) return ia == ib;
        const ExprNode& x = a.nodes_[static_cast<std::size_t>(ia)];
        const ExprNode& y = b.nodes_[static_cast<std::size_t>(ib)];
        if (x.op != y.op) return false;
        if (x.op == Op::Number && x.value != y.value) return false;
        if (x.op == Op::Var && x.var != y.var) return false;
        return same_subtree(a, x.lhs, b, y.lhs) && same_subtree(a, x.rhs, b, y.rhs);
    }

    std::string print(int i) const {
        const ExprNode& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
        case Op::Number: {
            std::array<char, 32> buf{};
            auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
            return std::string(buf.data(), res.ptr);
        }
        case Op::Pi: return "pi";
        case Op::Var: return fmt::format("x{}", n.var + 1);
        case Op::Time: return "t";
        case Op::Neg: return fmt::format("(-{})", print(n.lhs));
        case Op::Add: return fmt::format("({}+{})", print(n.lhs), print(n.rhs));
        case Op::Sub: return fmt::format("({}-{})", print(n.lhs), print(n.rhs));
        case Op::Mul: return fmt::format("({}*{})", print(n.lhs), print(n.rhs));
        case Op::Div: return fmt::format("({}/{})", print(n.lhs), print(n.rhs));
        case Op::Pow: return fmt::format("({}^{})", print(n.lhs), print(n.rhs));
        case Op::Min:
        case Op::Max:
            return fmt::format("{}({},{})", detail::function_name(n.op), print(n.lhs), print(n.rhs));
        default: return fmt::format("{}({})", detail::function_name(n.op), print(n.lhs));
        }
    }

    std::vector<ExprNode> nodes_;
    int root_{-1};
    int dim_{1};
};

class ExprParser {
public:
    ExprParser(std::string_view src, int dim) : src_(src) { out_.dim_ = dim; }

    MediumExpr parse() {
        if (out_.dim_ < 1) throw std::invalid_argument("medium dimension must be >= 1");
        skip_ws();
        if (pos_ == src_.size()) throw ParseError(pos_, "empty expression");
        out_.root_ = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError(pos_, fmt::format("unexpected '{}'", src_[pos_]));
        return std::move(out_);
    }

private:
    int add(ExprNode n) {
        out_.nodes_.push_back(n);
        return static_cast<int>(out_.nodes_.size()) - 1;
    }
    int binary(Op op, int l, int r) { return add({op, 0.0, 0, l, r}); }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) throw ParseError(pos_, fmt::format("expected '{}' but reached end of input", c));
            throw ParseError(pos_, fmt::format("expected '{}'", c));
        }
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = binary(Op::Add, lhs, parse_term());
            else if (accept('-')) lhs = binary(Op::Sub, lhs, parse_term());
            else return lhs;
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = binary(Op::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = binary(Op::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    int parse_unary() {
        if (accept('-')) return add({Op::Neg, 0.0, 0, parse_unary(), -1});
        return parse_power();
    }

    int parse_power() {
        int base = parse_primary();
        if (accept('^')) return binary(Op::Pow, base, parse_unary());
        return base;
    }

    int parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_expr();
            expect(')');
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError(pos_, fmt::format("unexpected '{}'", c));
    }

    int parse_number() {
        const std::size_t start = pos_;
        double value = 0.0;
        auto res = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
        if (res.ec != std::errc{}) throw ParseError(start, "malformed number");
        pos_ = static_cast<std::size_t>(res.ptr - src_.data());
        return add({Op::Number, value, 0, -1, -1});
    }

    int parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view id = src_.substr(start, pos_ - start);

        for (const auto& f : detail::kFunctions) {
            if (f.name != id) continue;
            skip_ws();
            if (pos_ >= src_.size() || src_[pos_] != '(')
                throw ParseError(pos_, fmt::format("expected '(' after function '{}'", id));
            ++pos_;
            std::vector<int> args{parse_expr()};
            while (accept(',')) args.push_back(parse_expr());
            expect(')');
            if (static_cast<int>(args.size()) != arity(f.op))
                throw ParseError(start, fmt::format("function '{}' takes {} argument(s), got {}", id,
                                                    arity(f.op), args.size()));
            return add({f.op, 0.0, 0, args[0], args.size() > 1 ? args[1] : -1});
        }

        if (id == "pi") return add({Op::Pi, 0.0, 0, -1, -1});
        if (id == "t") return add({Op::Time, 0.0, 0, -1, -1});
        if (id == "x" && out_.dim_ <= 2) return add({Op::Var, 0.0, 0, -1, -1});
        if (id == "y" && out_.dim_ == 2) return add({Op::Var, 0.0, 1, -1, -1});
        if (id.size() >= 2 && id[0] == 'x') {
            int index = 0;
            auto res = std::from_chars(id.data() + 1, id.data() + id.size(), index);
            if (res.ec == std::errc{} && res.ptr == id.data() + id.size() && index >= 1) {
                if (index > out_.dim_)
                    throw ParseError(start, fmt::format("variable '{}' exceeds dimension {}", id, out_.dim_));
                return add({Op::Var, 0.0, index - 1, -1, -1});
            }
        }
        throw ParseError(start, fmt::format("unknown identifier '{}'", id));
    }

    std::string_view src_;
    std::size_t pos_{0};
    MediumExpr out_;
};

inline MediumExpr parse_medium(std::string_view src, int dim) { return ExprParser(src, dim).parse(); }

/// Postfix program compiled from a MediumExpr. Evaluation is const and reentrant.
class CompiledExpr {
public:
    CompiledExpr() = default;

    explicit CompiledExpr(const MediumExpr& e) {
        emit(e, e.root());
        int depth = 0;
        for (const auto& ins : code_) {
            depth += 1 - arity(ins.op);
            max_depth_ = std::max(max_depth_, depth);
        }
    }

    double operator()(const double* x, double t) const {
        if (max_depth_ <= kInlineStack) {
            std::array<double, kInlineStack> stack;
            return run(stack.data(), x, t);
        }
        std::vector<double> stack(static_cast<std::size_t>(max_depth_));
        return run(stack.data(), x, t);
    }

private:
    static constexpr int kInlineStack = 64;

    struct Instr {
        Op op;
        double value;
        int var;
    };

    void emit(const MediumExpr& e, int i) {
        const ExprNode& n = e.nodes()[static_cast<std::size_t>(i)];
        if (n.lhs >= 0) emit(e, n.lhs);
        if (n.rhs >= 0) emit(e, n.rhs);
        double v = n.op == Op::Pi ? std::numbers::pi : n.value;
        code_.push_back({n.op == Op::Pi ? Op::Number : n.op, v, n.var});
    }

    double run(double* s, const double* x, double t) const {
        int sp = 0;
        for (const auto& ins : code_) {
            switch (ins.op) {
            case Op::Number: s[sp++] = ins.value; break;
            case Op::Var: s[sp++] = x[ins.var]; break;
            case Op::Time: s[sp++] = t; break;
            case Op::Add: --sp; s[sp - 1] += s[sp]; break;
            case Op::Sub: --sp; s[sp - 1] -= s[sp]; break;
            case Op::Mul: --sp; s[sp - 1] *= s[sp]; break;
            case Op::Div: --sp; s[sp - 1] /= s[sp]; break;
            case Op::Pow: --sp; s[sp - 1] = pow_op(s[sp - 1], s[sp]); break;
            case Op::Min: --sp; s[sp - 1] = std::min(s[sp - 1], s[sp]); break;
            case Op::Max: --sp; s[sp - 1] = std::max(s[sp - 1], s[sp]); break;
            case Op::Neg: s[sp - 1] = -s[sp - 1]; break;
            case Op::Sin: s[sp - 1] = std::sin(s[sp - 1]); break;
            case Op::Cos: s[sp - 1] = std::cos(s[sp - 1]); break;
            case Op::Exp: s[sp - 1] = std::exp(s[sp - 1]); break;
            case Op::Sqrt: s[sp - 1] = std::sqrt(s[sp - 1]); break;
            case Op::Abs: s[sp - 1] = std::abs(s[sp - 1]); break;
            case Op::Pi: break;
            }
        }
        return s[0];
    }

    static double pow_op(double base, double e) {
        if (e == 2.0) return base * base;
        return std::pow(base, e);
    }

    std::vector<Instr> code_;
    int max_depth_{0};
};

}  // namespace hele_homog
