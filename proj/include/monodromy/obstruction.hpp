#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "monodromy/linalg.hpp"
#include "monodromy/probing.hpp"

namespace monodromy {

struct ObstructionOptions {
    /// Relative threshold on ||[T1,T2]||_F / (1 + ||T1||_F * ||T2||_F).
    double comm_tol = 1e-4;
    /// Resonance search bound |k_i| <= k_max.
    int k_max = 6;
    double resonance_tol = 1e-8;
    /// Tolerance for pairing eigenvalues with their reciprocals.
    double pair_tol = 1e-4;
};

inline CMat commutator(const CMat& t1, const CMat& t2) {
    if (t1.rows() != t1.cols() || t2.rows() != t2.cols() || t1.rows() != t2.rows())
        throw SystemError("commutator: matrices must be square and of equal dimension");
    return t1 * t2 - t2 * t1;
}

struct CommutatorWitness {
    int first = 0, second = 0;
    double rel_norm = 0.0;
    CMat matrix;
};

/// All unordered pairs whose relative commutator norm exceeds tol,
/// sorted by decreasing norm.
inline std::vector<CommutatorWitness> noncommuting_pairs(std::span<const CMat> generators,
                                                         double tol) {
    std::vector<CommutatorWitness> out;
    for (std::size_t a = 0; a < generators.size(); ++a) {
        for (std::size_t b = a + 1; b < generators.size(); ++b) {
            CMat c = commutator(generators[a], generators[b]);
            double rel = c.norm() / (1.0 + generators[a].norm() * generators[b].norm());
            if (rel > tol)
                out.push_back({static_cast<int>(a), static_cast<int>(b), rel, std::move(c)});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CommutatorWitness& x, const CommutatorWitness& y) {
                  return x.rel_norm > y.rel_norm;
              });
    return out;
}

/// ||T' J T - J||_F with the transpose (not the adjoint): the complex
/// symplectic group is defined over the bilinear form.
inline double check_symplectic(const CMat& t) {
    if (t.rows() != t.cols() || t.rows() % 2 != 0)
        throw SystemError("check_symplectic: matrix dimension must be even");
    const CMat j = symplectic_form(t.rows());
    return (t.transpose() * j * t - j).norm();
}

struct ReciprocalPairing {
    std::vector<std::pair<Cx, Cx>> pairs;
    std::vector<Cx> leftovers;
};

namespace detail {

inline double reciprocal_residual(Cx a, Cx b) {
    Cx p = a * b;
    return std::abs(p - Cx(1.0, 0.0)) / (1.0 + std::abs(p));
}

} // namespace detail

/// Greedily pairs each eigenvalue of T with its nearest reciprocal partner;
/// eigenvalues without a partner within tol are reported as leftovers.
inline ReciprocalPairing eigen_reciprocal_pairs(const CMat& t, double tol) {
    if (t.rows() != t.cols() || t.rows() % 2 != 0)
        throw SystemError("eigen_reciprocal_pairs: matrix dimension must be even");
    Eigen::ComplexEigenSolver<CMat> solver(t, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw SystemError("eigen_reciprocal_pairs: eigenvalue solver failed");
    CVec ev = solver.eigenvalues();

    std::vector<int> order(static_cast<std::size_t>(ev.size()));
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(ev[a]) > std::abs(ev[b]); });

    std::vector<bool> used(order.size(), false);
    ReciprocalPairing result;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        int a = order[oi];
        if (used[static_cast<std::size_t>(a)]) continue;
        int best = -1;
        double best_res = std::numeric_limits<double>::infinity();
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            int b = order[oj];
            if (used[static_cast<std::size_t>(b)]) continue;
            double res = detail::reciprocal_residual(ev[a], ev[b]);
            if (res < best_res) {
                best_res = res;
                best = b;
            }
        }
        if (best >= 0 && best_res <= tol) {
            used[static_cast<std::size_t>(a)] = used[static_cast<std::size_t>(best)] = true;
            result.pairs.emplace_back(ev[a], ev[best]);
        } else {
            used[static_cast<std::size_t>(a)] = true;
            result.leftovers.push_back(ev[a]);
        }
    }
    return result;
}

/// One multiplier per reciprocal pair: the member with |lambda| >= 1,
/// breaking ties toward the larger argument.
inline std::vector<Cx> select_multipliers(const ReciprocalPairing& pairing) {
    std::vector<Cx> out;
    out.reserve(pairing.pairs.size());
    for (const auto& [a, b] : pairing.pairs) {
        double ma = std::abs(a), mb = std::abs(b);
        if (std::abs(ma - mb) <= 1e-12)
            out.push_back(std::arg(a) >= std::arg(b) ? a : b);
        else
            out.push_back(ma > mb ? a : b);
    }
    return out;
}

struct ResonanceCheck {
    bool nonresonant = true;
    /// Exponent vector witnessing lambda_1^k_1 ... lambda_p^k_p = 1; empty
    /// when non-resonant. Canonical sign: first nonzero entry positive.
    std::vector<int> witness;
};

/// Exhaustive search over all integer exponent vectors with 0 < sum|k_i|,
/// |k_i| <= k_max for a multiplicative relation within tol.
inline ResonanceCheck nonresonant_multipliers(std::span<const Cx> multipliers, int k_max,
                                              double tol) {
    const std::size_t p = multipliers.size();
    ResonanceCheck result;
    if (p == 0 || k_max < 1) return result;

    // powers[j][k_max + e] = multipliers[j]^e for e in [-k_max, k_max]
    std::vector<std::vector<Cx>> powers(p, std::vector<Cx>(2 * static_cast<std::size_t>(k_max) + 1));
    for (std::size_t j = 0; j < p; ++j) {
        powers[j][static_cast<std::size_t>(k_max)] = Cx(1.0, 0.0);
        for (int e = 1; e <= k_max; ++e) {
            powers[j][static_cast<std::size_t>(k_max + e)] =
                powers[j][static_cast<std::size_t>(k_max + e - 1)] * multipliers[j];
            powers[j][static_cast<std::size_t>(k_max - e)] =
                powers[j][static_cast<std::size_t>(k_max - e + 1)] / multipliers[j];
        }
    }

    std::vector<int> k(p, -k_max);
    for (;;) {
        bool all_zero = true;
        for (int kj : k)
            if (kj != 0) all_zero = false;
        if (!all_zero) {
            Cx prod(1.0, 0.0);
            for (std::size_t j = 0; j < p; ++j)
                prod *= powers[j][static_cast<std::size_t>(k_max + k[j])];
            if (std::abs(prod - Cx(1.0, 0.0)) <= tol) {
                result.nonresonant = false;
                result.witness = k;
                for (int& kj : result.witness) {
                    if (kj != 0) {
                        if (kj < 0)
                            for (int& x : result.witness) x = -x;
                        break;
                    }
                }
                return result;
            }
        }
        std::size_t j = 0;
        while (j < p && k[j] == k_max) {
            k[j] = -k_max;
            ++j;
        }
        if (j == p) break;
        ++k[j];
    }
    return result;
}

inline ResonanceCheck nonresonant(const CMat& t, int k_max, double tol, double pair_tol) {
    auto pairing = eigen_reciprocal_pairs(t, pair_tol);
    auto lambdas = select_multipliers(pairing);
    return nonresonant_multipliers(lambdas, k_max, tol);
}

enum class Conclusion { ObstructionFound, NoObstructionFound, Inconclusive };

inline std::string_view to_string(Conclusion c) {
    switch (c) {
        case Conclusion::ObstructionFound: return "obstruction_found";
        case Conclusion::NoObstructionFound: return "no_obstruction_found";
        case Conclusion::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct GeneratorDiagnostics {
    int outcome_index = -1;
    std::optional<double> det_residual;
    std::optional<double> symplectic_residual;
    std::optional<ReciprocalPairing> pairing;
    std::optional<ResonanceCheck> resonance;
};

struct ObstructionVerdict {
    Conclusion conclusion = Conclusion::NoObstructionFound;
    std::vector<CommutatorWitness> witnesses;
    std::vector<GeneratorDiagnostics> diagnostics;
    std::vector<std::string> notes;
};

/// Verdict over a probe/scan report: non-commuting generator pairs witness an
/// obstruction to meromorphic integrability; non-returning probes make a
/// negative answer inconclusive (no monodromy matrix exists for such loops).
inline ObstructionVerdict verdict(const ScanReport& report, const ObstructionOptions& opts = {}) {
    ObstructionVerdict v;
    auto gens = report.generator_matrices();
    auto gen_idx = report.generator_outcome_indices();
    v.witnesses = noncommuting_pairs(gens, opts.comm_tol);

    int non_returning = 0, aborted = 0;
    for (const auto& o : report.outcomes) {
        if (o.classification == ProbeClass::NonReturning) ++non_returning;
        if (o.classification == ProbeClass::Aborted) ++aborted;
    }

    for (std::size_t g = 0; g < gens.size(); ++g) {
        GeneratorDiagnostics d;
        d.outcome_index = gen_idx[g];
        const auto& gen = *report.outcomes[static_cast<std::size_t>(gen_idx[g])].generator;
        d.det_residual = gen.det_residual;
        d.symplectic_residual = gen.symplectic_residual;
        if (gens[g].rows() % 2 == 0) {
            d.pairing = eigen_reciprocal_pairs(gens[g], opts.pair_tol);
            auto lambdas = select_multipliers(*d.pairing);
            d.resonance = nonresonant_multipliers(lambdas, opts.k_max, opts.resonance_tol);
        }
        v.diagnostics.push_back(std::move(d));
    }

    if (!v.witnesses.empty()) {
        v.conclusion = Conclusion::ObstructionFound;
        v.notes.push_back("non-commuting monodromy generators found: the system admits no "
                          "complete set of meromorphic first integrals near this solution");
    } else if (non_returning > 0) {
        v.conclusion = Conclusion::Inconclusive;
        v.notes.push_back(std::to_string(non_returning) +
                          " probe(s) did not return within the traversal budget; such loops "
                          "carry no monodromy matrix (possible logarithmic branching)");
    } else {
        v.conclusion = Conclusion::NoObstructionFound;
        v.notes.push_back("all commutators below threshold; consider retrying with different "
                          "initial data x(t0) or a wider candidate domain");
    }
    if (aborted > 0)
        v.notes.push_back(std::to_string(aborted) + " probe(s) aborted before classification");

    bool any_resonant = false;
    for (const auto& d : v.diagnostics)
        if (d.resonance && !d.resonance->nonresonant) any_resonant = true;
    if (!gens.empty()) {
        v.notes.push_back(any_resonant
                              ? "some generators are resonant; the strongest spectral "
                                "conclusions need a non-resonant element"
                              : "all generators non-resonant up to the exponent bound");
    }
    return v;
}

} // namespace monodromy
