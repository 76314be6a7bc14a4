#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "monodromy/expr.hpp"
#include "monodromy/system.hpp"
#include "testutil.hpp"

using namespace monodromy;
using testutil::fd_derivative;
using testutil::fd_derivative_imag;

TEST_CASE("parse builds the expected tree shapes") {
    Expr e = parse("q1^2 + 3*q2");
    Expr expected = Expr::sum(Expr::power(Expr::variable("q1"), 2.0),
                              Expr::product(Expr::constant(Cx(3, 0)), Expr::variable("q2")));
    CHECK(structurally_equal(e, expected));

    Expr f = parse("p_psi^2/(2*sin(theta)^2)");
    Expr fexp = Expr::quotient(
        Expr::power(Expr::variable("p_psi"), 2.0),
        Expr::product(Expr::constant(Cx(2, 0)),
                      Expr::power(Expr::call(Func::Sin, Expr::variable("theta")), 2.0)));
    CHECK(structurally_equal(f, fexp));

    CHECK(structurally_equal(parse("2*i"), Expr::constant(Cx(0, 2))));
    CHECK(structurally_equal(parse("(1 + 2*i)"), Expr::constant(Cx(1, 2))));
}

TEST_CASE("parse reports errors with positions") {
    try {
        parse("(q1 +");
        FAIL("expected a syntax error");
    } catch (const ParseError& err) {
        CHECK(err.offset == 5);
    }
    CHECK_THROWS_AS(parse("foo(2)"), ParseError);
    CHECK_THROWS_AS(parse("2 q"), ParseError);      // juxtaposition
    CHECK_THROWS_AS(parse("1e+"), ParseError);
    CHECK_THROWS_AS(parse("q1^q2"), ParseError);    // exponent must be numeric
    CHECK_THROWS_AS(parse(")"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_NOTHROW(parse("unknown_symbol + 1"));     // symbols bind at eval time
}

TEST_CASE("eval over complex numbers, principal branches") {
    // sin(i) = i*sinh(1)
    Cx v = eval(parse("sin(x)"), {{"x", Cx(0, 1)}});
    CHECK(std::abs(v - Cx(0, std::sinh(1.0))) < 1e-15);

    CHECK(std::abs(eval(parse("x^2"), {{"x", Cx(1, 1)}}) - Cx(0, 2)) < 1e-15);
    CHECK(std::abs(eval(parse("sqrt(x)"), {{"x", Cx(-1, 0)}}) - Cx(0, 1)) < 1e-15);
    CHECK(std::abs(eval(parse("log(x)"), {{"x", Cx(-1, 0)}}) - Cx(0, M_PI)) < 1e-15);

    try {
        eval(parse("1/x"), {{"x", Cx(0, 0)}});
        FAIL("expected singular evaluation");
    } catch (const EvalError& err) {
        CHECK(err.kind == EvalError::Kind::Singular);
    }
    try {
        eval(parse("x + y"), {{"x", Cx(1, 0)}});
        FAIL("expected unbound symbol");
    } catch (const EvalError& err) {
        CHECK(err.kind == EvalError::Kind::UnboundSymbol);
    }
    CHECK_THROWS_AS(eval(parse("log(x)"), {{"x", Cx(0, 0)}}), EvalError);
    CHECK_THROWS_AS(eval(parse("x^-2"), {{"x", Cx(0, 0)}}), EvalError);
}

TEST_CASE("diff: exact rules on simple forms") {
    CHECK(structurally_equal(diff(parse("q^3"), "q"), parse("3*q^2")));
    CHECK(structurally_equal(diff(parse("2.5"), "q"), Expr::constant(Cx(0, 0))));
    CHECK(structurally_equal(diff(parse("q"), "p"), Expr::constant(Cx(0, 0))));

    // d/dtheta 1/sin(theta)^2 checked against central differences at 1+0.3i
    Expr e = parse("1/sin(theta)^2");
    Expr de = diff(e, "theta");
    std::map<std::string, Cx> env{{"theta", Cx(1.0, 0.3)}};
    Cx exact = eval(de, env);
    CHECK(std::abs(exact - fd_derivative(e, "theta", env)) <= 1e-6 * (1 + std::abs(exact)));
    CHECK(std::abs(exact - fd_derivative_imag(e, "theta", env)) <= 1e-6 * (1 + std::abs(exact)));
}

TEST_CASE("diff agrees with finite differences on random expressions") {
    std::mt19937 rng(20240811u);
    std::vector<std::string> vars{"x", "y"};
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 120; ++trial) {
        Expr e = testutil::random_expr(rng, vars, 4);
        Expr de = diff(e, "x");
        for (int pt = 0; pt < 3; ++pt) {
            std::map<std::string, Cx> env{{"x", testutil::random_complex(rng, 1.5)},
                                          {"y", testutil::random_complex(rng, 1.5)}};
            try {
                Cx d = eval(de, env);
                Cx fd = fd_derivative(e, "x", env);
                // skip ill-conditioned sample points (poles nearby blow up the
                // finite-difference stencil)
                if (std::abs(d) > 1e3) continue;
                if (std::abs(d - fd) <= 1e-6 * (1.0 + std::abs(d))) {
                    ++checked;
                } else {
                    // confirm with the imaginary-axis stencil before failing
                    Cx fd2 = fd_derivative_imag(e, "x", env);
                    INFO("expr: " << render(e) << " at x=" << env["x"]);
                    CHECK(std::abs(d - fd2) <= 1e-6 * (1.0 + std::abs(d)));
                    ++checked;
                }
            } catch (const EvalError&) {
                continue; // singular sample point
            }
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("render/parse round-trip is the identity on random trees") {
    std::mt19937 rng(987654u);
    std::vector<std::string> vars{"x", "y", "z_1"};
    for (int k = 0; k < 1200; ++k) {
        Expr e = testutil::random_expr(rng, vars, 8);
        std::string s = render(e);
        INFO("rendered: " << s);
        Expr p = parse(s);
        CHECK(structurally_equal(e, p));
    }
}

TEST_CASE("free variables and substitution") {
    Expr e = parse("a*x^2 + sin(b*x)");
    auto fv = free_variables(e);
    CHECK(fv == std::set<std::string>{"a", "b", "x"});

    Expr s = substitute(e, "a", Expr::constant(Cx(2, 0)));
    CHECK(free_variables(s) == std::set<std::string>{"b", "x"});
    std::map<std::string, Cx> env{{"b", Cx(1, 0)}, {"x", Cx(0.5, 0)}};
    CHECK(std::abs(eval(s, env) - (2.0 * 0.25 + std::sin(0.5))) < 1e-14);

    // every variable node's symbol shows up in the free-variable set
    std::mt19937 rng(13u);
    for (int k = 0; k < 50; ++k) {
        Expr r = testutil::random_expr(rng, {"u", "v"}, 5);
        for (const auto& name : free_variables(r)) {
            CHECK((name == "u" || name == "v"));
        }
    }
}

TEST_CASE("hamilton_equations: harmonic oscillator and error cases") {
    SystemDef sys = hamilton_equations(parse("(p^2 + q^2)/2"), {"q"}, {"p"});
    REQUIRE(sys.dimension() == 2);
    CHECK(sys.is_hamiltonian());
    CVec x(2);
    x << Cx(0.3, -0.2), Cx(1.1, 0.4);
    CVec v = sys.rhs_at(x);
    CHECK(std::abs(v[0] - x[1]) < 1e-14); // dq/dt = p
    CHECK(std::abs(v[1] + x[0]) < 1e-14); // dp/dt = -q

    CHECK_THROWS_AS(hamilton_equations(parse("q*p"), {"q"}, {"q"}), SystemError);
    CHECK_THROWS_AS(hamilton_equations(parse("q1*p1"), {"q1", "q2"}, {"p1"}), SystemError);
    CHECK_THROWS_AS(hamilton_equations(parse("q*p + w"), {"q"}, {"p"}), SystemError);
}

TEST_CASE("SystemDef validates symbols and jacobian matches diff") {
    CHECK_THROWS_AS(SystemDef("bad", {"t"}, {parse("t")}), SystemError);
    CHECK_THROWS_AS(SystemDef("bad", {"x", "x"}, {parse("x"), parse("x")}), SystemError);
    CHECK_THROWS_AS(SystemDef("bad", {"x"}, {parse("x + q")}), SystemError);
    CHECK_THROWS_AS(SystemDef("bad", {"x"}, {parse("x")}, {3}), SystemError);

    SystemDef rot("rotation", {"x", "y"}, {parse("y"), parse("-x")});
    const auto& jac = jacobian(rot);
    CHECK(structurally_equal(jac[0][0], Expr::constant(Cx(0, 0))));
    CHECK(structurally_equal(jac[0][1], Expr::constant(Cx(1, 0))));
    CHECK(structurally_equal(jac[1][0], Expr::constant(Cx(-1, 0))));
    CMat a = rot.jacobian_at(CVec::Zero(2));
    CHECK(std::abs(a(0, 1) - Cx(1, 0)) < 1e-15);
    CHECK(std::abs(a(1, 0) + Cx(1, 0)) < 1e-15);
}

TEST_CASE("hamiltonian systems are divergence-free at random points") {
    std::mt19937 rng(777u);
    // a deliberately messy Hamiltonian
    SystemDef sys = hamilton_equations(parse("p1^2*q2/2 + cos(q1)*p2 + q1^3*q2 - p1*p2^2"),
                                       {"q1", "q2"}, {"p1", "p2"});
    int tested = 0;
    while (tested < 100) {
        CVec x(4);
        for (int k = 0; k < 4; ++k) x[k] = testutil::random_complex(rng, 2.0);
        try {
            CMat a = sys.jacobian_at(x);
            CHECK(std::abs(a.trace()) <= 1e-10);
            ++tested;
        } catch (const EvalError&) {
            continue;
        }
    }
}
