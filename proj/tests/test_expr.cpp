#include <doctest.h>

#include <cmath>
#include <atomic>
#include <cstdlib>
#include <thread>

#include "ksymp/expr.hpp"
#include "ksymp/model.hpp"

using namespace ksymp;

namespace {

// Deterministic random expression trees over x, y, z for the oracle suites.
Expr random_tree(Rng& rng, int depth) {
    const char* vars[] = {"x", "y", "z"};
    if (depth == 0 || rng.next_u64() % 5 == 0) {
        if (rng.next_u64() % 2 == 0)
            return Expr::variable(vars[rng.next_u64() % 3]);
        return Expr::constant(rng.uniform(-2.0, 2.0));
    }
    switch (rng.next_u64() % 10) {
    case 0: return Expr::add(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 1: return Expr::sub(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 2: return Expr::mul(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 3: return Expr::div(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 4: return Expr::sin(random_tree(rng, depth - 1));
    case 5: return Expr::cos(random_tree(rng, depth - 1));
    case 6: return Expr::exp(random_tree(rng, depth - 1));
    case 7: return Expr::log(random_tree(rng, depth - 1));
    case 8: return Expr::sqrt(random_tree(rng, depth - 1));
    default: return Expr::pow(random_tree(rng, depth - 1),
                              static_cast<double>(2 + rng.next_u64() % 3));
    }
}

Bindings random_bindings(Rng& rng) {
    return Bindings{{"x", rng.uniform(0.1, 1.5)},
                    {"y", rng.uniform(0.1, 1.5)},
                    {"z", rng.uniform(0.1, 1.5)}};
}

} // namespace

TEST_CASE("parse follows standard precedence") {
    const Expr e = Expr::parse("q1^2 + v1_1");
    CHECK(e.kind() == ExprKind::Add);
    CHECK(e.eval({{"q1", 3.0}, {"v1_1", 4.0}}) == doctest::Approx(13.0));

    const Expr f = Expr::parse("sin(q1)*v1_2");
    CHECK(f.kind() == ExprKind::Mul);
    CHECK(f.eval({{"q1", 0.5}, {"v1_2", 2.0}}) == doctest::Approx(2.0 * std::sin(0.5)));

    // pow binds tighter than unary minus, mul/div left-associative
    CHECK(Expr::parse("-2^2").eval({}) == doctest::Approx(-4.0));
    CHECK(Expr::parse("12/2/3").eval({}) == doctest::Approx(2.0));
    CHECK(Expr::parse("1 - 2 - 3").eval({}) == doctest::Approx(-4.0));
    CHECK(Expr::parse("2*q1^3").eval({{"q1", 2.0}}) == doctest::Approx(16.0));
}

TEST_CASE("parse is total, evaluation partial") {
    const Expr e = Expr::parse("1/(q1-q1)");
    CHECK_THROWS_AS(e.eval({{"q1", 0.7}}), EvalError);
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_AS(Expr::parse("q1 + + q2"), ParseError);
    CHECK_THROWS_AS(Expr::parse("foo(q1)"), ParseError);
    CHECK_THROWS_AS(Expr::parse("q1^v1_1"), ParseError); // exponent must be constant
    try {
        Expr::parse("q1 + foo(2)");
        CHECK(false);
    } catch (const ParseError& err) {
        CHECK(err.offset() == 5);
    }
    for (const char* bad : {"((((", "sin()", ")", "1 2", "q1 @ 2", "", "sin 3", "1e"})
        CHECK_THROWS_AS(Expr::parse(bad), ParseError);
}

TEST_CASE("eval contract") {
    CHECK(Expr::parse("q1^2+1").eval({{"q1", 2.0}}) == doctest::Approx(5.0));
    CHECK(Expr::parse("sin(q1)").eval({{"q1", 0.0}}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(Expr::parse("v1_1").eval({}), EvalError);
    CHECK_THROWS_AS(Expr::parse("log(q1)").eval({{"q1", -1.0}}), EvalError);
    CHECK_THROWS_AS(Expr::parse("q1^0.5").eval({{"q1", -1.0}}), EvalError);
    CHECK(Expr::parse("q1^-2").eval({{"q1", 2.0}}) == doctest::Approx(0.25));
}

TEST_CASE("diff basics") {
    const Expr d1 = Expr::parse("q1^2").diff("q1").simplified();
    CHECK(d1.eval({{"q1", 3.5}}) == doctest::Approx(7.0));
    CHECK(d1.str() == "2*q1");

    const Expr d2 = Expr::parse("v1_1*v2_2").diff("v1_1").simplified();
    CHECK(d2.str() == "v2_2");

    // other variables are independent
    CHECK(Expr::parse("v1_1*v2_2").diff("q1").simplified().str() == "0");
}

TEST_CASE("diff agrees with central differences on random trees") {
    Rng rng(2024);
    const double h = 1e-5;
    int trees_checked = 0;
    while (trees_checked < 20) {
        const Expr e = random_tree(rng, 6);
        const Expr dx = e.diff("x");
        int points = 0, attempts = 0;
        while (points < 50 && attempts < 500) {
            ++attempts;
            Bindings b = random_bindings(rng);
            double sym = 0.0, up = 0.0, down = 0.0;
            try {
                sym = dx.eval(b);
                Bindings bp = b, bm = b;
                bp["x"] += h;
                bm["x"] -= h;
                up = e.eval(bp);
                down = e.eval(bm);
            } catch (const EvalError&) {
                continue;
            }
            const double fd = (up - down) / (2.0 * h);
            if (!std::isfinite(sym) || !std::isfinite(fd) || std::fabs(sym) > 1e6)
                continue;
            const double rel = std::fabs(sym - fd) / std::max(1.0, std::fabs(sym));
            CHECK(rel < 1e-6);
            ++points;
        }
        if (points == 50)
            ++trees_checked;
    }
    CHECK(trees_checked == 20);
}

TEST_CASE("simplify rules") {
    CHECK(Expr::parse("0*v1_1 + q1").simplified().str() == "q1");
    CHECK(Expr::parse("2*3").simplified().str() == "6");
    CHECK(Expr::parse("q1^1").simplified().str() == "q1");
    CHECK(Expr::parse("q1^0").simplified().str() == "1");
    CHECK(Expr::parse("1*(v1_1*1)").simplified().str() == "v1_1");
    CHECK(Expr::parse("q1 - 0").simplified().str() == "q1");
    CHECK(Expr::parse("0 - q1").simplified().str() == "-q1");
    // 0.5*(2*x) folds through the nested constant
    CHECK(Expr::parse("0.5*(2*q1)").simplified().str() == "q1");
}

TEST_CASE("simplify preserves evaluation on random trees") {
    Rng rng(77);
    for (int t = 0; t < 100; ++t) {
        const Expr e = random_tree(rng, 5);
        const Expr s = e.simplified();
        for (int p = 0; p < 10; ++p) {
            const Bindings b = random_bindings(rng);
            double orig = 0.0;
            try {
                orig = e.eval(b);
            } catch (const EvalError&) {
                continue;
            }
            if (!std::isfinite(orig))
                continue;
            const double after = s.eval(b);
            CHECK(std::fabs(orig - after) <= 1e-12 * std::max(1.0, std::fabs(orig)));
        }
    }
}

TEST_CASE("print/parse round-trips evaluation") {
    Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        const Expr e = random_tree(rng, 5);
        const Expr reparsed = Expr::parse(e.str());
        for (int p = 0; p < 5; ++p) {
            const Bindings b = random_bindings(rng);
            double orig = 0.0;
            try {
                orig = e.eval(b);
            } catch (const EvalError&) {
                continue;
            }
            if (!std::isfinite(orig))
                continue;
            CHECK(reparsed.eval(b) == doctest::Approx(orig).epsilon(1e-12));
        }
    }
}

TEST_CASE("double formatting round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 2.0, -0.0, 1e-300, -6.25e17, 3.141592653589793}) {
        const std::string s = format_double(x);
        const double back = std::strtod(s.c_str(), nullptr);
        if (x == 0.0)
            CHECK(back == 0.0);
        else
            CHECK(back == x);
    }
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("substitute replaces variables simultaneously") {
    const Expr e = Expr::parse("x*y + x");
    const Expr sub = e.substitute({{"x", Expr::parse("y")}, {"y", Expr::parse("x")}});
    CHECK(sub.eval({{"x", 2.0}, {"y", 3.0}}) == doctest::Approx(3.0 * 2.0 + 3.0));
}

TEST_CASE("shared expressions evaluate safely from concurrent workers") {
    const Expr e = Expr::parse("sin(x)*y + exp(z/4) - x^3");
    const Bindings b{{"x", 0.7}, {"y", -1.2}, {"z", 0.3}};
    const double expected = e.eval(b);
    std::vector<std::thread> pool;
    std::atomic<int> mismatches{0};
    for (int w = 0; w < 4; ++w)
        pool.emplace_back([&] {
            for (int i = 0; i < 2000; ++i)
                if (e.eval(b) != expected)
                    mismatches.fetch_add(1);
        });
    for (auto& t : pool)
        t.join();
    CHECK(mismatches.load() == 0);
}

TEST_CASE("free variables") {
    const auto vars = Expr::parse("sin(q1)*v1_2 + exp(z)").free_variables();
    CHECK(vars.size() == 3);
    CHECK(vars.count("q1") == 1);
    CHECK(vars.count("v1_2") == 1);
    CHECK(vars.count("z") == 1);
}
