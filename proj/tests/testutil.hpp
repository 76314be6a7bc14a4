#pragma once

#include <complex>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "monodromy/expr.hpp"
#include "monodromy/linalg.hpp"
#include "monodromy/system.hpp"

namespace testutil {

using monodromy::Cx;
using monodromy::CMat;
using monodromy::CVec;
using monodromy::Expr;

/// Central finite difference of eval along the real and imaginary axes; both
/// estimate the holomorphic derivative. Returns the real-axis estimate.
inline Cx fd_derivative(const Expr& e, const std::string& var,
                        const std::map<std::string, Cx>& env, double h = 1e-6) {
    auto ep = env, em = env;
    ep[var] += h;
    em[var] -= h;
    return (monodromy::eval(e, ep) - monodromy::eval(e, em)) / (2.0 * h);
}

inline Cx fd_derivative_imag(const Expr& e, const std::string& var,
                             const std::map<std::string, Cx>& env, double h = 1e-6) {
    auto ep = env, em = env;
    ep[var] += Cx(0, h);
    em[var] -= Cx(0, h);
    return (monodromy::eval(e, ep) - monodromy::eval(e, em)) / Cx(0, 2.0 * h);
}

inline Cx random_complex(std::mt19937& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return Cx(u(rng), u(rng));
}

inline CMat random_matrix(std::mt19937& rng, int n, double scale = 1.0) {
    CMat m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = random_complex(rng, scale);
    return m;
}

/// Random expression tree over the given variables, built through the public
/// constructors (so constant folding applies, as it does for parsed input).
inline Expr random_expr(std::mt19937& rng, const std::vector<std::string>& vars, int depth) {
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_real_distribution<double> cval(-4.0, 4.0);
    std::uniform_int_distribution<int> vpick(0, static_cast<int>(vars.size()) - 1);
    if (depth <= 0) {
        if (pick(rng) < 4) return Expr::constant(Cx(cval(rng), pick(rng) < 3 ? cval(rng) : 0.0));
        return Expr::variable(vars[static_cast<std::size_t>(vpick(rng))]);
    }
    switch (pick(rng)) {
        case 0: return Expr::constant(Cx(cval(rng), 0.0));
        case 1: return Expr::variable(vars[static_cast<std::size_t>(vpick(rng))]);
        case 2: return Expr::sum(random_expr(rng, vars, depth - 1), random_expr(rng, vars, depth - 1));
        case 3:
            return Expr::product(random_expr(rng, vars, depth - 1),
                                 random_expr(rng, vars, depth - 1));
        case 4:
            return Expr::quotient(random_expr(rng, vars, depth - 1),
                                  random_expr(rng, vars, depth - 1));
        case 5: {
            std::uniform_int_distribution<int> ep(-3, 4);
            int k = ep(rng);
            if (pick(rng) < 2) // occasionally non-integer
                return Expr::power(random_expr(rng, vars, depth - 1), k + 0.5);
            return Expr::power(random_expr(rng, vars, depth - 1), k);
        }
        case 6: return Expr::negate(random_expr(rng, vars, depth - 1));
        default: {
            std::uniform_int_distribution<int> fpick(0, 7);
            return Expr::call(static_cast<monodromy::Func>(fpick(rng)),
                              random_expr(rng, vars, depth - 1));
        }
    }
}

/// Two-dimensional linear system  dx/dt = [R1/(t-c1) + R2/(t-c2)] x  with
/// residue matrices R1 = ((l1, 0), (nu, 0)) and R2 = ((0, mu), (0, l2)).
/// The zero solution makes every loop trajectory-closed after one traversal,
/// so probes read off genuine monodromy matrices of the variational flow.
inline monodromy::SystemDef two_pole_system(Cx c1, Cx c2, double l1 = 0.3, double l2 = 0.2,
                                            double mu = 0.15, double nu = -0.25) {
    using monodromy::Func;
    Expr t = Expr::variable("t");
    Expr x1 = Expr::variable("x1");
    Expr x2 = Expr::variable("x2");
    Expr d1 = t - Expr::constant(c1);
    Expr d2 = t - Expr::constant(c2);
    Expr v1 = Expr::constant(Cx(l1, 0)) * x1 / d1 + Expr::constant(Cx(mu, 0)) * x2 / d2;
    Expr v2 = Expr::constant(Cx(nu, 0)) * x1 / d1 + Expr::constant(Cx(l2, 0)) * x2 / d2;
    return monodromy::SystemDef("two_pole", {"x1", "x2"}, {v1, v2});
}

} // namespace testutil
