#include "causal_pareto/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace cpareto {

struct Expr::Node {
    enum class Kind { kConst, kVar, kUnary, kBinary, kCall } kind;
    double value = 0.0;
    std::string name;  // variable or function name
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Token {
    enum class Kind { kNumber, kIdent, kOp, kEnd } kind;
    std::string text;
    double value = 0.0;
    std::size_t pos = 0;
};

class Lexer {
  public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        current_.pos = pos_;
        if (pos_ >= text_.size()) {
            current_ = {Token::Kind::kEnd, "", 0.0, pos_};
            return;
        }
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = text_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end == start) throw ExprError("malformed number at position " + std::to_string(pos_));
            current_ = {Token::Kind::kNumber, std::string(start, static_cast<std::size_t>(end - start)), v, pos_};
            pos_ += static_cast<std::size_t>(end - start);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            current_ = {Token::Kind::kIdent, text_.substr(start, pos_ - start), 0.0, start};
            return;
        }
        static const std::string ops = "+-*/^(),";
        if (ops.find(c) != std::string::npos) {
            current_ = {Token::Kind::kOp, std::string(1, c), 0.0, pos_};
            ++pos_;
            return;
        }
        throw ExprError(std::string("unexpected character '") + c + "' at position " + std::to_string(pos_));
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    Token current_;
};

struct FunctionInfo {
    int arity;
};

const std::unordered_map<std::string, FunctionInfo>& functions() {
    static const std::unordered_map<std::string, FunctionInfo> table = {
        {"pow", {2}}, {"exp", {1}}, {"log", {1}}, {"sin", {1}}, {"cos", {1}},
        {"abs", {1}}, {"min", {2}}, {"max", {2}}, {"select", {3}},
    };
    return table;
}

class Parser {
  public:
    explicit Parser(const std::string& text) : lex_(text) {}

    NodePtr parse() {
        NodePtr e = expr();
        if (lex_.peek().kind != Token::Kind::kEnd)
            throw ExprError("trailing input at position " + std::to_string(lex_.peek().pos));
        return e;
    }

  private:
    static NodePtr make_binary(const std::string& op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::Kind::kBinary;
        n->name = op;
        n->args = {std::move(a), std::move(b)};
        return n;
    }

    bool accept_op(const char* op) {
        if (lex_.peek().kind == Token::Kind::kOp && lex_.peek().text == op) {
            lex_.take();
            return true;
        }
        return false;
    }

    void expect_op(const char* op) {
        if (!accept_op(op))
            throw ExprError(std::string("expected '") + op + "' at position " + std::to_string(lex_.peek().pos));
    }

    NodePtr expr() {
        NodePtr left = term();
        for (;;) {
            if (accept_op("+"))
                left = make_binary("+", left, term());
            else if (accept_op("-"))
                left = make_binary("-", left, term());
            else
                return left;
        }
    }

    NodePtr term() {
        NodePtr left = unary();
        for (;;) {
            if (accept_op("*"))
                left = make_binary("*", left, unary());
            else if (accept_op("/"))
                left = make_binary("/", left, unary());
            else
                return left;
        }
    }

    NodePtr unary() {
        if (accept_op("-")) {
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Kind::kUnary;
            n->name = "-";
            n->args = {unary()};
            return n;
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept_op("^")) return make_binary("^", base, unary());  // right-assoc
        return base;
    }

    NodePtr primary() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::kNumber) {
            Token num = lex_.take();
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Kind::kConst;
            n->value = num.value;
            return n;
        }
        if (t.kind == Token::Kind::kIdent) {
            Token id = lex_.take();
            if (accept_op("(")) {
                auto it = functions().find(id.text);
                if (it == functions().end())
                    throw ExprError("unknown function '" + id.text + "' at position " + std::to_string(id.pos));
                auto n = std::make_shared<Expr::Node>();
                n->kind = Expr::Node::Kind::kCall;
                n->name = id.text;
                n->args.push_back(expr());
                while (accept_op(",")) n->args.push_back(expr());
                expect_op(")");
                if (static_cast<int>(n->args.size()) != it->second.arity)
                    throw ExprError("function '" + id.text + "' expects " + std::to_string(it->second.arity) +
                                    " arguments, got " + std::to_string(n->args.size()));
                return n;
            }
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Kind::kVar;
            n->name = id.text;
            return n;
        }
        if (accept_op("(")) {
            NodePtr inner = expr();
            expect_op(")");
            return inner;
        }
        throw ExprError("expected expression at position " + std::to_string(t.pos));
    }

    Lexer lex_;
};

void collect_vars(const NodePtr& n, std::set<std::string>& out) {
    if (n->kind == Expr::Node::Kind::kVar) out.insert(n->name);
    for (const auto& a : n->args) collect_vars(a, out);
}

// Precedence levels for printing: + - (1), * / (2), unary - (3), ^ (4).
int precedence(const Expr::Node& n) {
    switch (n.kind) {
        case Expr::Node::Kind::kBinary:
            if (n.name == "+" || n.name == "-") return 1;
            if (n.name == "*" || n.name == "/") return 2;
            return 4;  // ^
        case Expr::Node::Kind::kUnary:
            return 3;
        default:
            return 5;
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s = buf;
    // Prefer the short form when it round-trips.
    char short_buf[40];
    std::snprintf(short_buf, sizeof(short_buf), "%g", v);
    if (std::strtod(short_buf, nullptr) == v) s = short_buf;
    return s;
}

void print_node(const NodePtr& n, std::string& out) {
    auto child = [&](const NodePtr& c, bool needs_parens) {
        if (needs_parens) out += '(';
        print_node(c, out);
        if (needs_parens) out += ')';
    };
    switch (n->kind) {
        case Expr::Node::Kind::kConst:
            if (n->value < 0) {
                out += '(';
                out += format_number(n->value);
                out += ')';
            } else {
                out += format_number(n->value);
            }
            break;
        case Expr::Node::Kind::kVar:
            out += n->name;
            break;
        case Expr::Node::Kind::kUnary:
            out += '-';
            child(n->args[0], precedence(*n->args[0]) < precedence(*n));
            break;
        case Expr::Node::Kind::kBinary: {
            int p = precedence(*n);
            // Right operand of - and / needs parens at equal precedence.
            child(n->args[0], precedence(*n->args[0]) < p);
            out += n->name;
            bool strict = (n->name == "-" || n->name == "/" || n->name == "^");
            child(n->args[1], precedence(*n->args[1]) < p + (strict ? 1 : 0));
            break;
        }
        case Expr::Node::Kind::kCall: {
            out += n->name;
            out += '(';
            for (std::size_t i = 0; i < n->args.size(); ++i) {
                if (i) out += ", ";
                print_node(n->args[i], out);
            }
            out += ')';
            break;
        }
    }
}

}  // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.root_ = Parser(text).parse();
    collect_vars(e.root_, e.vars_);
    return e;
}

std::string Expr::to_string() const {
    if (!root_) return "";
    std::string out;
    print_node(root_, out);
    return out;
}

void Expr::bind(const std::unordered_map<std::string, int>& slots) {
    program_.clear();
    max_stack_ = 0;
    int depth = 0;
    // Post-order emission.
    auto emit = [&](auto&& self, const NodePtr& n) -> void {
        switch (n->kind) {
            case Node::Kind::kConst:
                program_.push_back({OpCode::kConst, n->value, -1});
                ++depth;
                break;
            case Node::Kind::kVar: {
                auto it = slots.find(n->name);
                if (it == slots.end()) throw ExprError("unbound variable '" + n->name + "'");
                program_.push_back({OpCode::kVar, 0.0, it->second});
                ++depth;
                break;
            }
            case Node::Kind::kUnary:
                self(self, n->args[0]);
                program_.push_back({OpCode::kNeg, 0.0, -1});
                break;
            case Node::Kind::kBinary: {
                self(self, n->args[0]);
                self(self, n->args[1]);
                OpCode op = n->name == "+"   ? OpCode::kAdd
                            : n->name == "-" ? OpCode::kSub
                            : n->name == "*" ? OpCode::kMul
                            : n->name == "/" ? OpCode::kDiv
                                             : OpCode::kPow;
                program_.push_back({op, 0.0, -1});
                --depth;
                break;
            }
            case Node::Kind::kCall: {
                for (const auto& a : n->args) self(self, a);
                OpCode op;
                if (n->name == "pow") op = OpCode::kPow;
                else if (n->name == "exp") op = OpCode::kExp;
                else if (n->name == "log") op = OpCode::kLog;
                else if (n->name == "sin") op = OpCode::kSin;
                else if (n->name == "cos") op = OpCode::kCos;
                else if (n->name == "abs") op = OpCode::kAbs;
                else if (n->name == "min") op = OpCode::kMin;
                else if (n->name == "max") op = OpCode::kMax;
                else op = OpCode::kSelect;
                program_.push_back({op, 0.0, -1});
                depth -= static_cast<int>(n->args.size()) - 1;
                break;
            }
        }
        if (depth > max_stack_) max_stack_ = depth;
    };
    if (root_) emit(emit, root_);
    if (max_stack_ > 64) throw ExprError("expression too deep");
}

double Expr::eval(std::span<const double> slot_values) const {
    double stack[64];
    int top = 0;
    for (const Instr& in : program_) {
        switch (in.op) {
            case OpCode::kConst: stack[top++] = in.value; break;
            case OpCode::kVar: stack[top++] = slot_values[static_cast<std::size_t>(in.slot)]; break;
            case OpCode::kNeg: stack[top - 1] = -stack[top - 1]; break;
            case OpCode::kAdd: --top; stack[top - 1] += stack[top]; break;
            case OpCode::kSub: --top; stack[top - 1] -= stack[top]; break;
            case OpCode::kMul: --top; stack[top - 1] *= stack[top]; break;
            case OpCode::kDiv:
                --top;
                if (stack[top] == 0.0) throw EvalError("division by zero");
                stack[top - 1] /= stack[top];
                break;
            case OpCode::kPow: {
                --top;
                double r = std::pow(stack[top - 1], stack[top]);
                if (!std::isfinite(r)) throw EvalError("pow produced a non-finite value");
                stack[top - 1] = r;
                break;
            }
            case OpCode::kExp: stack[top - 1] = std::exp(stack[top - 1]); break;
            case OpCode::kLog:
                if (stack[top - 1] <= 0.0) throw EvalError("log of a non-positive value");
                stack[top - 1] = std::log(stack[top - 1]);
                break;
            case OpCode::kSin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case OpCode::kCos: stack[top - 1] = std::cos(stack[top - 1]); break;
            case OpCode::kAbs: stack[top - 1] = std::fabs(stack[top - 1]); break;
            case OpCode::kMin: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
            case OpCode::kMax: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
            case OpCode::kSelect: {
                top -= 2;
                stack[top - 1] = stack[top - 1] > 0.0 ? stack[top] : stack[top + 1];
                break;
            }
        }
    }
    double v = stack[0];
    if (!std::isfinite(v)) throw EvalError("expression produced a non-finite value");
    return v;
}

}  // namespace cpareto
