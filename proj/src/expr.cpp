#include "mcdcert/expr.hpp"

#include "mcdcert/error.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>

namespace mcdcert::expr {

namespace {

struct FuncInfo {
    std::string_view name;
    Func func;
    int arity;
};

constexpr std::array<FuncInfo, 9> kFunctions{{
    {"sin", Func::Sin, 1},
    {"cos", Func::Cos, 1},
    {"tan", Func::Tan, 1},
    {"exp", Func::Exp, 1},
    {"log", Func::Log, 1},
    {"sqrt", Func::Sqrt, 1},
    {"abs", Func::Abs, 1},
    {"min", Func::Min, 2},
    {"max", Func::Max, 2},
}};

const FuncInfo* lookup_function(std::string_view name) {
    for (const auto& f : kFunctions) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

Node make_binary(Kind k, Node lhs, Node rhs) {
    Node n;
    n.kind = k;
    n.args.reserve(2);
    n.args.push_back(std::move(lhs));
    n.args.push_back(std::move(rhs));
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Node parse_all() {
        skip_ws();
        if (pos_ == text_.size()) throw ParseError(0, "empty expression");
        Node n = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) {
            if (text_[pos_] == ')') throw ParseError(pos_, "unbalanced ')'");
            throw ParseError(pos_, std::string("unexpected '") + text_[pos_] + "'");
        }
        return n;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Node parse_sum() {
        Node lhs = parse_product();
        for (;;) {
            if (accept('+')) {
                lhs = make_binary(Kind::Add, std::move(lhs), parse_product());
            } else if (accept('-')) {
                lhs = make_binary(Kind::Sub, std::move(lhs), parse_product());
            } else {
                return lhs;
            }
        }
    }

    Node parse_product() {
        Node lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_binary(Kind::Mul, std::move(lhs), parse_unary());
            } else if (accept('/')) {
                lhs = make_binary(Kind::Div, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Node parse_unary() {
        if (accept('-')) {
            Node n;
            n.kind = Kind::Neg;
            n.args.push_back(parse_unary());
            return n;
        }
        return parse_power();
    }

    Node parse_power() {
        Node base = parse_primary();
        if (accept('^')) return make_binary(Kind::Pow, std::move(base), parse_unary());
        return base;
    }

    Node parse_primary() {
        skip_ws();
        if (pos_ == text_.size()) throw ParseError(pos_, "unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            const std::size_t open = pos_++;
            Node inner = parse_sum();
            if (!accept(')')) {
                skip_ws();
                throw ParseError(pos_, "missing ')' for '(' at offset " + std::to_string(open));
            }
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        if (c == ')') throw ParseError(pos_, "unbalanced ')'");
        throw ParseError(pos_, std::string("unexpected '") + c + "'");
    }

    Node parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t k = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
                ++k;
            }
            return k;
        };
        std::size_t mantissa = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError(start, "malformed number");
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) throw ParseError(start, "malformed exponent");
        }
        Node n;
        n.kind = Kind::Number;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, n.value);
        if (ec != std::errc{} || ptr != last || !std::isfinite(n.value)) {
            throw ParseError(start, "numeric literal out of range");
        }
        return n;
    }

    Node parse_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        std::string_view name = text_.substr(start, pos_ - start);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            const FuncInfo* info = lookup_function(name);
            if (info == nullptr) throw ParseError(start, "unknown function '" + std::string(name) + "'");
            ++pos_;
            Node n;
            n.kind = Kind::Call;
            n.func = info->func;
            if (!accept(')')) {
                do {
                    n.args.push_back(parse_sum());
                } while (accept(','));
                if (!accept(')')) {
                    skip_ws();
                    throw ParseError(pos_, "missing ')' in call to " + std::string(name));
                }
            }
            if (static_cast<int>(n.args.size()) != info->arity) {
                throw ParseError(start, std::string(name) + " takes " + std::to_string(info->arity) +
                                            " argument(s), got " + std::to_string(n.args.size()));
            }
            return n;
        }
        Node n;
        n.kind = Kind::Variable;
        n.name = std::string(name);
        return n;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

void collect_variables(const Node& n, std::vector<std::string>& out) {
    if (n.kind == Kind::Variable) {
        for (const auto& v : out) {
            if (v == n.name) return;
        }
        out.push_back(n.name);
        return;
    }
    for (const auto& a : n.args) collect_variables(a, out);
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void render(const Node& n, std::string& out) {
    switch (n.kind) {
    case Kind::Number: out += format_number(n.value); return;
    case Kind::Variable: out += n.name; return;
    case Kind::Neg:
        out += "(-";
        render(n.args[0], out);
        out += ')';
        return;
    case Kind::Call:
        out += function_name(n.func);
        out += '(';
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i > 0) out += ", ";
            render(n.args[i], out);
        }
        out += ')';
        return;
    default: break;
    }
    static constexpr std::string_view ops[] = {"", "", "", " + ", " - ", " * ", " / ", " ^ "};
    out += '(';
    render(n.args[0], out);
    out += ops[static_cast<int>(n.kind)];
    render(n.args[1], out);
    out += ')';
}

// Arithmetic shared by both evaluation paths. Returns an error message, or
// nullptr on success.
const char* apply_unary(Func f, double a, double& r) {
    switch (f) {
    case Func::Sin: r = std::sin(a); break;
    case Func::Cos: r = std::cos(a); break;
    case Func::Tan: r = std::tan(a); break;
    case Func::Exp: r = std::exp(a); break;
    case Func::Log:
        if (!(a > 0.0)) return "log of nonpositive value";
        r = std::log(a);
        break;
    case Func::Sqrt:
        if (a < 0.0) return "sqrt of negative value";
        r = std::sqrt(a);
        break;
    case Func::Abs: r = std::fabs(a); break;
    default: return "bad function arity";
    }
    return nullptr;
}

const char* apply_binary(Kind k, Func f, double a, double b, double& r) {
    switch (k) {
    case Kind::Add: r = a + b; break;
    case Kind::Sub: r = a - b; break;
    case Kind::Mul: r = a * b; break;
    case Kind::Div:
        if (b == 0.0) return "division by zero";
        r = a / b;
        break;
    case Kind::Pow:
        if (a < 0.0 && std::trunc(b) != b) return "non-integer power of negative base";
        if (a == 0.0 && b < 0.0) return "negative power of zero";
        r = std::pow(a, b);
        break;
    case Kind::Call:
        if (f == Func::Min) {
            r = std::fmin(a, b);
        } else if (f == Func::Max) {
            r = std::fmax(a, b);
        } else {
            return "bad function arity";
        }
        break;
    default: return "bad operator";
    }
    return nullptr;
}

[[noreturn]] void fail(const char* what, std::vector<double> point, const std::string& where) {
    throw EvaluationError(std::string("evaluation failed: ") + what + where, std::move(point));
}

std::string describe_point(const std::map<std::string, double, std::less<>>& point) {
    std::ostringstream os;
    os.precision(17);
    os << " at (";
    bool first = true;
    for (const auto& [k, v] : point) {
        if (!first) os << ", ";
        first = false;
        os << k << '=' << v;
    }
    os << ')';
    return os.str();
}

std::string describe_point(std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << " at (";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i > 0) os << ", ";
        os << x[i];
    }
    os << ')';
    return os.str();
}

struct MapEvaluator {
    const std::map<std::string, double, std::less<>>& point;

    [[noreturn]] void error(const char* what) const {
        std::vector<double> values;
        for (const auto& kv : point) values.push_back(kv.second);
        fail(what, std::move(values), describe_point(point));
    }

    double operator()(const Node& n) const {
        double r = 0.0;
        const char* err = nullptr;
        switch (n.kind) {
        case Kind::Number: return n.value;
        case Kind::Variable: {
            auto it = point.find(n.name);
            if (it == point.end()) {
                std::vector<double> values;
                for (const auto& kv : point) values.push_back(kv.second);
                throw EvaluationError("unbound variable '" + n.name + "'", std::move(values));
            }
            return it->second;
        }
        case Kind::Neg: r = -(*this)(n.args[0]); break;
        case Kind::Call:
            if (n.args.size() == 1) {
                err = apply_unary(n.func, (*this)(n.args[0]), r);
            } else {
                err = apply_binary(Kind::Call, n.func, (*this)(n.args[0]), (*this)(n.args[1]), r);
            }
            break;
        default: err = apply_binary(n.kind, n.func, (*this)(n.args[0]), (*this)(n.args[1]), r); break;
        }
        if (err != nullptr) error(err);
        if (!std::isfinite(r)) error("non-finite result");
        return r;
    }
};

}  // namespace

Expression::Expression(Node root) : root_(std::make_shared<const Node>(std::move(root))) {}

std::vector<std::string> Expression::variables() const {
    std::vector<std::string> out;
    collect_variables(*root_, out);
    return out;
}

Expression parse(std::string_view text) { return Expression(Parser(text).parse_all()); }

std::string to_string(const Expression& e) {
    std::string out;
    render(e.root(), out);
    return out;
}

std::string_view function_name(Func f) {
    for (const auto& info : kFunctions) {
        if (info.func == f) return info.name;
    }
    return "?";
}

int function_arity(Func f) {
    for (const auto& info : kFunctions) {
        if (info.func == f) return info.arity;
    }
    return 0;
}

double evaluate(const Expression& e, const std::map<std::string, double, std::less<>>& point) {
    return MapEvaluator{point}(e.root());
}

namespace {

std::size_t compile(const Node& n, std::span<const std::string> names, auto& program) {
    using Instr = typename std::remove_reference_t<decltype(program)>::value_type;
    switch (n.kind) {
    case Kind::Number: program.push_back(Instr{n.kind, n.func, n.value, 0}); return 1;
    case Kind::Variable: {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == n.name) {
                program.push_back(Instr{n.kind, n.func, 0.0, i});
                return 1;
            }
        }
        throw InvalidArgument("expression references undeclared variable '" + n.name + "'");
    }
    default: break;
    }
    std::size_t depth = 0;
    for (std::size_t i = 0; i < n.args.size(); ++i) {
        depth = std::max(depth, i + compile(n.args[i], names, program));
    }
    program.push_back(Instr{n.kind, n.func, 0.0, n.args.size()});
    return depth;
}

}  // namespace

BoundExpression::BoundExpression(Expression e, std::span<const std::string> names)
    : expr_(std::move(e)), arity_(names.size()) {
    max_stack_ = compile(expr_.root(), names, program_);
}

double BoundExpression::operator()(std::span<const double> x) const {
    if (x.size() != arity_) {
        throw EvaluationError("expected " + std::to_string(arity_) + " inputs, got " + std::to_string(x.size()),
                              std::vector<double>(x.begin(), x.end()));
    }
    // Small fixed buffer covers practically every expression; fall back to the heap.
    std::array<double, 32> local{};
    std::vector<double> heap;
    double* stack = local.data();
    if (max_stack_ > local.size()) {
        heap.resize(max_stack_);
        stack = heap.data();
    }
    std::size_t top = 0;
    for (const Instr& in : program_) {
        double r = 0.0;
        const char* err = nullptr;
        switch (in.kind) {
        case Kind::Number: stack[top++] = in.value; continue;
        case Kind::Variable: stack[top++] = x[in.index]; continue;
        case Kind::Neg: stack[top - 1] = -stack[top - 1]; continue;
        case Kind::Call:
            if (in.index == 1) {
                err = apply_unary(in.func, stack[top - 1], r);
                top -= 1;
            } else {
                err = apply_binary(Kind::Call, in.func, stack[top - 2], stack[top - 1], r);
                top -= 2;
            }
            break;
        default:
            err = apply_binary(in.kind, in.func, stack[top - 2], stack[top - 1], r);
            top -= 2;
            break;
        }
        if (err == nullptr && !std::isfinite(r)) err = "non-finite result";
        if (err != nullptr) fail(err, std::vector<double>(x.begin(), x.end()), describe_point(x));
        stack[top++] = r;
    }
    return stack[0];
}

}  // namespace mcdcert::expr
