#include <doctest.h>

#include <cmath>

#include "causal_pareto/expr.hpp"

using namespace cpareto;

namespace {

double eval1(const std::string& text, const std::unordered_map<std::string, double>& env = {}) {
    Expr e = Expr::parse(text);
    std::unordered_map<std::string, int> slots;
    std::vector<double> values;
    for (const auto& [name, value] : env) {
        slots[name] = static_cast<int>(values.size());
        values.push_back(value);
    }
    e.bind(slots);
    return e.eval(values);
}

}  // namespace

TEST_CASE("arithmetic and precedence") {
    CHECK(eval1("1 + 2*3") == doctest::Approx(7.0));
    CHECK(eval1("(1 + 2)*3") == doctest::Approx(9.0));
    CHECK(eval1("2^3^2") == doctest::Approx(512.0));   // right-assoc
    CHECK(eval1("-2^2") == doctest::Approx(-4.0));
    CHECK(eval1("(-2)^2") == doctest::Approx(4.0));
    CHECK(eval1("10/4/5") == doctest::Approx(0.5));
    CHECK(eval1("1 - 2 - 3") == doctest::Approx(-4.0));
}

TEST_CASE("functions") {
    CHECK(eval1("min(3, max(1, 2))") == doctest::Approx(2.0));
    CHECK(eval1("abs(-4.5)") == doctest::Approx(4.5));
    CHECK(eval1("exp(log(7))") == doctest::Approx(7.0));
    CHECK(eval1("pow(2, 10)") == doctest::Approx(1024.0));
    CHECK(eval1("sin(0) + cos(0)") == doctest::Approx(1.0));
    CHECK(eval1("select(1, 10, 20)") == doctest::Approx(10.0));
    CHECK(eval1("select(-1, 10, 20)") == doctest::Approx(20.0));
}

TEST_CASE("variables") {
    CHECK(eval1("x*y + 1", {{"x", 2.0}, {"y", 3.0}}) == doctest::Approx(7.0));
    Expr e = Expr::parse("a + b*a");
    CHECK(e.variables() == std::set<std::string>{"a", "b"});
}

TEST_CASE("guarded evaluation") {
    CHECK_THROWS_AS(eval1("1/0"), EvalError);
    CHECK_THROWS_AS(eval1("log(0)"), EvalError);
    CHECK_THROWS_AS(eval1("log(-1)"), EvalError);
    CHECK_THROWS_AS(eval1("pow(0, -1)"), EvalError);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(Expr::parse("1 +"), ExprError);
    CHECK_THROWS_AS(Expr::parse("foo(1)"), ExprError);
    CHECK_THROWS_AS(Expr::parse("min(1)"), ExprError);
    CHECK_THROWS_AS(Expr::parse("(1"), ExprError);
    CHECK_THROWS_AS(Expr::parse("1 2"), ExprError);
    CHECK_THROWS_AS(Expr::parse(""), ExprError);
}

TEST_CASE("canonical text is a fixpoint of parse") {
    for (const std::string text : {
             "0.25*X1^2 + (X2 - 2)^2 - X1*X2*U/2 + UY1",
             "1/(1 + exp(13 - 0.1*Age - 0.2*BMI))",
             "-x^2 + (-2)^2",
             "a - (b - c)",
             "min(a, max(b, select(c, 1, 2)))",
         }) {
        std::string once = Expr::parse(text).to_string();
        std::string twice = Expr::parse(once).to_string();
        CHECK(once == twice);
    }
}

TEST_CASE("canonical text preserves value") {
    std::unordered_map<std::string, double> env = {{"x", 1.3}, {"y", -0.7}};
    for (const std::string text : {"x - y - 1", "x/y/2", "-x^2*y", "x - (y - 1)", "2^-x"}) {
        double direct = eval1(text, env);
        double roundtrip = eval1(Expr::parse(text).to_string(), env);
        CHECK(direct == doctest::Approx(roundtrip).epsilon(1e-15));
    }
}
