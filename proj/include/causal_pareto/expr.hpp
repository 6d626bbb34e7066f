#pragma once

#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cpareto {

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a guarded operation (log of a non-positive number, division by
// zero, non-finite result) is hit during evaluation.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Arithmetic expressions over named variables: + - * / ^ with unary minus,
// pow/exp/log/sin/cos/abs/min/max, select(c,a,b) (c > 0 picks a) and numeric
// literals. Parsed once into an AST, compiled to a small stack program for
// fast repeated evaluation inside the sampler.
class Expr {
  public:
    static Expr parse(const std::string& text);

    // Canonical text form; parsing the result yields an identical expression.
    std::string to_string() const;

    const std::set<std::string>& variables() const { return vars_; }

    // Bind variable names to value slots. Unknown names throw ExprError.
    void bind(const std::unordered_map<std::string, int>& slots);

    // Evaluate with the bound slots. Throws EvalError on guard violations.
    double eval(std::span<const double> slot_values) const;

    Expr() = default;

    struct Node;  // AST node; exposed for the parser/printer implementation

  private:
    std::shared_ptr<const Node> root_;
    std::set<std::string> vars_;

    enum class OpCode : std::uint8_t {
        kConst, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow,
        kExp, kLog, kSin, kCos, kAbs, kMin, kMax, kSelect,
    };
    struct Instr {
        OpCode op;
        double value = 0.0;
        int slot = -1;
    };
    std::vector<Instr> program_;
    int max_stack_ = 0;

    void compile();
};

}  // namespace cpareto
