#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monodromy/expr.hpp"
#include "monodromy/linalg.hpp"
#include "monodromy/system.hpp"

namespace monodromy {

// ---------------------------------------------------------------------------
// Built-in systems: two mechanical Hamiltonians with published probe setups
// plus small closed-form systems used as integration oracles.
// State orderings are frozen: monodromy matrices are basis-dependent.
// ---------------------------------------------------------------------------

/// H = (p1^2 + p2^2)/2 - q2^2*(A + q1) - (lambda/3)*q1^3,
/// state order (q1, q2, p1, p2).
inline SystemDef henon_heiles(double a_coef, double lambda) {
    Expr h = parse("(p1^2 + p2^2)/2 - q2^2*(A + q1) - (lambda/3)*q1^3");
    h = substitute(h, "A", Expr::constant(Cx(a_coef, 0.0)));
    h = substitute(h, "lambda", Expr::constant(Cx(lambda, 0.0)));
    return hamilton_equations(h, {"q1", "q2"}, {"p1", "p2"}, "henon_heiles");
}

/// Dynamically symmetric satellite on a circular orbit, after reduction:
/// H = p_psi^2/(2 sin^2 theta) + p_theta^2/2 - p_psi + sin^2 psi sin^2 theta / 2,
/// state order (psi, theta, p_psi, p_theta); psi and theta are angles, so
/// trajectory returns are checked modulo 2*pi on them.
inline SystemDef satellite() {
    Expr h = parse("p_psi^2/(2*sin(theta)^2) + p_theta^2/2 - p_psi"
                   " + sin(psi)^2*sin(theta)^2/2");
    return hamilton_equations(h, {"psi", "theta"}, {"p_psi", "p_theta"}, "satellite", {0, 1});
}

/// dx/dt = x^2: movable pole at t = 1/x0, single-valued continuation.
inline SystemDef oracle_riccati() {
    return SystemDef("oracle_riccati", {"x"}, {parse("x^2")});
}

/// dx/dt = x^3: movable branch point of order 2 at t = 1/(2 x0^2).
inline SystemDef oracle_cubic() {
    return SystemDef("oracle_cubic", {"x"}, {parse("x^3")});
}

/// dx/dt = lambda/(t - c) * x: regular singular point at c with monodromy
/// multiplier exp(2 pi i lambda) per counterclockwise turn.
inline SystemDef oracle_linear_pole(Cx lambda, Cx c) {
    Expr rhs = Expr::quotient(Expr::constant(lambda),
                              Expr::variable("t") - Expr::constant(c)) *
               Expr::variable("x");
    return SystemDef("oracle_linear_pole", {"x"}, {rhs});
}

/// Harmonic oscillator H = (p^2 + q^2)/2; entire flow, trivial monodromy.
inline SystemDef oracle_harmonic() {
    return hamilton_equations(parse("(p^2 + q^2)/2"), {"q"}, {"p"}, "oracle_harmonic");
}

struct ParamSpec {
    std::string name;
    double default_value = 0.0;
};

struct ReferenceSetup {
    CVec x0;
    Cx t0{};
    std::vector<Cx> candidates;
    int traversals = 0; // published traversal count; 0 when detected automatically
};

struct CatalogEntry {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    std::function<SystemDef(const std::map<std::string, double>&)> build;
    std::optional<ReferenceSetup> reference;
};

namespace detail {

inline double param_or(const std::map<std::string, double>& params, const std::string& key,
                       double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

} // namespace detail

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> out;

        {
            CatalogEntry e;
            e.name = "henon_heiles";
            e.description = "Henon-Heiles Hamiltonian, state (q1, q2, p1, p2)";
            e.params = {{"A", 0.25}, {"lambda", 1.0}};
            e.build = [](const std::map<std::string, double>& p) {
                return henon_heiles(detail::param_or(p, "A", 0.25),
                                    detail::param_or(p, "lambda", 1.0));
            };
            ReferenceSetup ref;
            ref.x0 = CVec(4);
            ref.x0 << Cx(1, 0), Cx(-0.4, 0), Cx(-1.25, 0), Cx(-0.3, 0);
            ref.t0 = Cx(1.0, 0.0);
            ref.candidates = {Cx(0.2, 2.5), Cx(0.2, -2.5)};
            e.reference = ref;
            out.push_back(std::move(e));
        }
        {
            CatalogEntry e;
            e.name = "satellite";
            e.description = "symmetric satellite on a circular orbit, state "
                            "(psi, theta, p_psi, p_theta); psi, theta periodic";
            e.build = [](const std::map<std::string, double>&) { return satellite(); };
            ReferenceSetup ref;
            ref.x0 = CVec(4);
            ref.x0 << Cx(0, 0), Cx(1, 0), Cx(0.1, 0), Cx(0, 0);
            ref.t0 = Cx(0.0, 0.0);
            ref.candidates = {Cx(4.8, 0.8), Cx(4.8, -0.8)};
            ref.traversals = 2;
            e.reference = ref;
            out.push_back(std::move(e));
        }
        {
            CatalogEntry e;
            e.name = "oracle_riccati";
            e.description = "dx/dt = x^2; movable pole, single-valued";
            e.build = [](const std::map<std::string, double>&) { return oracle_riccati(); };
            out.push_back(std::move(e));
        }
        {
            CatalogEntry e;
            e.name = "oracle_cubic";
            e.description = "dx/dt = x^3; movable branch point of order 2";
            e.build = [](const std::map<std::string, double>&) { return oracle_cubic(); };
            out.push_back(std::move(e));
        }
        {
            CatalogEntry e;
            e.name = "oracle_linear_pole";
            e.description = "dx/dt = lambda/(t - c) x; multiplier exp(2 pi i lambda)";
            e.params = {{"lambda_re", 0.5}, {"lambda_im", 0.0}, {"c_re", 0.0}, {"c_im", 0.0}};
            e.build = [](const std::map<std::string, double>& p) {
                return oracle_linear_pole(Cx(detail::param_or(p, "lambda_re", 0.5),
                                             detail::param_or(p, "lambda_im", 0.0)),
                                          Cx(detail::param_or(p, "c_re", 0.0),
                                             detail::param_or(p, "c_im", 0.0)));
            };
            out.push_back(std::move(e));
        }
        {
            CatalogEntry e;
            e.name = "oracle_harmonic";
            e.description = "harmonic oscillator H = (p^2 + q^2)/2; entire flow";
            e.build = [](const std::map<std::string, double>&) { return oracle_harmonic(); };
            out.push_back(std::move(e));
        }
        return out;
    }();
    return entries;
}

inline const CatalogEntry* find_catalog_entry(const std::string& name) {
    for (const auto& e : catalog())
        if (e.name == name) return &e;
    return nullptr;
}

} // namespace monodromy
