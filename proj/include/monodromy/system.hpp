#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "monodromy/expr.hpp"
#include "monodromy/linalg.hpp"

namespace monodromy {

struct SystemError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// A complexified first-order ODE  dx/dt = v(x, t)  together with the symbolic
// Jacobian A = dv/dx used by the variational equations.  The symbol `t` is
// reserved for explicit time dependence, `i` for the imaginary unit.
// Instances are immutable and safe to share between threads; evaluation
// receives the environment [x_0 .. x_{n-1}, t].
// ---------------------------------------------------------------------------
class SystemDef {
public:
    SystemDef(std::string name, std::vector<std::string> state_symbols, std::vector<Expr> rhs,
              std::vector<int> angle_indices = {}, bool is_hamiltonian = false,
              std::optional<Expr> hamiltonian = std::nullopt)
        : name_(std::move(name)),
          symbols_(std::move(state_symbols)),
          rhs_(std::move(rhs)),
          angle_indices_(std::move(angle_indices)),
          is_hamiltonian_(is_hamiltonian),
          hamiltonian_(std::move(hamiltonian)) {
        validate();

        std::vector<std::string> env_symbols = symbols_;
        env_symbols.emplace_back("t");

        const int n = dimension();
        jacobian_.resize(static_cast<std::size_t>(n));
        bound_rhs_.reserve(rhs_.size());
        bound_jacobian_.reserve(static_cast<std::size_t>(n) * n);
        for (int r = 0; r < n; ++r) {
            const Expr& f = rhs_[static_cast<std::size_t>(r)];
            bound_rhs_.push_back(bind_slots(f, env_symbols));
            auto& row = jacobian_[static_cast<std::size_t>(r)];
            row.reserve(static_cast<std::size_t>(n));
            for (int c = 0; c < n; ++c) {
                row.push_back(diff(f, symbols_[static_cast<std::size_t>(c)]));
                bound_jacobian_.push_back(bind_slots(row.back(), env_symbols));
            }
        }
    }

    int dimension() const { return static_cast<int>(rhs_.size()); }
    const std::string& name() const { return name_; }
    const std::vector<std::string>& state_symbols() const { return symbols_; }
    const std::vector<Expr>& rhs() const { return rhs_; }
    const std::vector<std::vector<Expr>>& jacobian_exprs() const { return jacobian_; }
    const std::vector<int>& angle_indices() const { return angle_indices_; }
    bool is_hamiltonian() const { return is_hamiltonian_; }
    const std::optional<Expr>& hamiltonian() const { return hamiltonian_; }

    bool depends_on_time() const {
        for (const Expr& f : rhs_)
            if (free_variables(f).count("t")) return true;
        return false;
    }

    /// env = [x_0 .. x_{n-1}, t]
    void eval_rhs(std::span<const Cx> env, CVec& out) const {
        const int n = dimension();
        out.resize(n);
        for (int r = 0; r < n; ++r)
            out[r] = eval_slots(bound_rhs_[static_cast<std::size_t>(r)], env);
    }

    void eval_jacobian(std::span<const Cx> env, CMat& out) const {
        const int n = dimension();
        out.resize(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                out(r, c) = eval_slots(bound_jacobian_[static_cast<std::size_t>(r * n + c)], env);
    }

    CVec rhs_at(const CVec& x, Cx t = Cx(0.0, 0.0)) const {
        std::vector<Cx> env = make_env(x, t);
        CVec out;
        eval_rhs(env, out);
        return out;
    }

    CMat jacobian_at(const CVec& x, Cx t = Cx(0.0, 0.0)) const {
        std::vector<Cx> env = make_env(x, t);
        CMat out;
        eval_jacobian(env, out);
        return out;
    }

    Cx hamiltonian_at(const CVec& x) const {
        if (!hamiltonian_) throw SystemError("system '" + name_ + "' has no Hamiltonian");
        std::map<std::string, Cx> env;
        for (int k = 0; k < dimension(); ++k)
            env[symbols_[static_cast<std::size_t>(k)]] = x[k];
        return eval(*hamiltonian_, env);
    }

    std::vector<std::string> dsl_source() const {
        std::vector<std::string> out;
        out.reserve(rhs_.size());
        for (const Expr& f : rhs_) out.push_back(render(f));
        return out;
    }

    std::uint64_t definition_hash() const {
        std::uint64_t h = fnv1a(name_);
        for (const auto& s : symbols_) h = fnv1a(s, h);
        for (const Expr& f : rhs_) h = fnv1a(render(f), h);
        for (int a : angle_indices_) h = fnv1a(std::to_string(a), h);
        h = fnv1a(is_hamiltonian_ ? "H" : "-", h);
        return h;
    }

private:
    std::vector<Cx> make_env(const CVec& x, Cx t) const {
        if (x.size() != dimension()) throw SystemError("state dimension mismatch");
        std::vector<Cx> env(static_cast<std::size_t>(dimension()) + 1);
        for (int k = 0; k < dimension(); ++k) env[static_cast<std::size_t>(k)] = x[k];
        env.back() = t;
        return env;
    }

    void validate() const {
        if (rhs_.empty()) throw SystemError("system must have dimension >= 1");
        if (symbols_.size() != rhs_.size())
            throw SystemError("state symbol count does not match system dimension");
        std::set<std::string> seen;
        for (const auto& s : symbols_) {
            if (s.empty()) throw SystemError("empty state symbol");
            if (s == "t" || s == "i")
                throw SystemError("state symbol '" + s + "' is reserved");
            if (!seen.insert(s).second) throw SystemError("duplicate state symbol '" + s + "'");
        }
        for (const Expr& f : rhs_) {
            for (const auto& v : free_variables(f)) {
                if (v != "t" && !seen.count(v))
                    throw SystemError("right-hand side uses unknown symbol '" + v + "'");
            }
        }
        std::set<int> aseen;
        for (int a : angle_indices_) {
            if (a < 0 || a >= dimension()) throw SystemError("angle index out of range");
            if (!aseen.insert(a).second) throw SystemError("duplicate angle index");
        }
    }

    std::string name_;
    std::vector<std::string> symbols_;
    std::vector<Expr> rhs_;
    std::vector<int> angle_indices_;
    bool is_hamiltonian_ = false;
    std::optional<Expr> hamiltonian_;
    std::vector<std::vector<Expr>> jacobian_;
    std::vector<Expr> bound_rhs_;
    std::vector<Expr> bound_jacobian_;
};

/// The symbolic Jacobian matrix, entry (r, c) = d rhs_r / d x_c.
inline const std::vector<std::vector<Expr>>& jacobian(const SystemDef& sys) {
    return sys.jacobian_exprs();
}

/// Builds the canonical equations of H(q, p): state order (q_1..q_k, p_1..p_k),
/// dq_i/dt = dH/dp_i and dp_i/dt = -dH/dq_i.
inline SystemDef hamilton_equations(const Expr& hamiltonian, std::vector<std::string> coords,
                                    std::vector<std::string> momenta, std::string name = "",
                                    std::vector<int> angle_indices = {}) {
    if (coords.empty() || coords.size() != momenta.size())
        throw SystemError("hamilton_equations: coords and momenta must pair up");
    std::set<std::string> seen(coords.begin(), coords.end());
    for (const auto& p : momenta)
        if (!seen.insert(p).second)
            throw SystemError("hamilton_equations: symbol collision on '" + p + "'");
    for (const auto& v : free_variables(hamiltonian))
        if (!seen.count(v))
            throw SystemError("hamilton_equations: Hamiltonian uses free symbol '" + v +
                              "' outside coords/momenta");

    std::vector<Expr> rhs;
    rhs.reserve(2 * coords.size());
    for (const auto& p : momenta) rhs.push_back(diff(hamiltonian, p));
    for (const auto& q : coords) rhs.push_back(Expr::negate(diff(hamiltonian, q)));

    std::vector<std::string> state = coords;
    state.insert(state.end(), momenta.begin(), momenta.end());
    if (name.empty()) name = "hamiltonian";
    return SystemDef(std::move(name), std::move(state), std::move(rhs), std::move(angle_indices),
                     /*is_hamiltonian=*/true, hamiltonian);
}

} // namespace monodromy
