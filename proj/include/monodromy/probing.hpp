#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "monodromy/cpath.hpp"
#include "monodromy/linalg.hpp"
#include "monodromy/odeint.hpp"
#include "monodromy/system.hpp"
#include "monodromy/version.hpp"

namespace monodromy {

struct ProbeOptions {
    double radius = 0.4;
    int max_traversals = 12;
    double return_tol = 1e-6;
    double matrix_tol = 1e-6;
    bool clockwise = false;
    std::vector<Cx> waypoints;
    IntegratorOptions integrator;
};

enum class ProbeClass { Trivial, Generator, NonReturning, Aborted };

inline std::string_view to_string(ProbeClass c) {
    switch (c) {
        case ProbeClass::Trivial: return "trivial";
        case ProbeClass::Generator: return "generator";
        case ProbeClass::NonReturning: return "non_returning";
        case ProbeClass::Aborted: return "aborted";
    }
    return "?";
}

struct MonodromyGenerator {
    CMat matrix;
    CPath loop = CPath::point(Cx(0.0, 0.0)); // single-turn loop; `traversals` = branch order
    int traversals = 1;
    Cx base_point{};
    CVec initial_x;
    Cx candidate{};
    double return_residual = 0.0;
    std::optional<double> det_residual;        // |det(T) - 1|, Hamiltonian systems
    std::optional<double> symplectic_residual; // ||T' J T - J||_F, Hamiltonian systems
};

struct ProbeOutcome {
    Cx candidate{};
    ProbeClass classification = ProbeClass::Aborted;
    std::optional<MonodromyGenerator> generator;
    int traversals_used = 0;
    double return_residual = std::numeric_limits<double>::quiet_NaN();
    std::optional<std::string> abort_reason;
};

/// Max-norm distance between states; coordinates listed in `angle_indices`
/// compare their real parts modulo 2*pi (reduced to (-pi, pi]), imaginary
/// parts directly.
inline double return_distance(const CVec& a, const CVec& b, std::span<const int> angle_indices) {
    if (a.size() != b.size()) throw SystemError("return_distance: length mismatch");
    double worst = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        Cx d = a[k] - b[k];
        bool is_angle = false;
        for (int j : angle_indices)
            if (j == static_cast<int>(k)) is_angle = true;
        if (is_angle) {
            double re = std::remainder(d.real(), 2.0 * std::numbers::pi);
            if (re <= -std::numbers::pi) re += 2.0 * std::numbers::pi;
            d = Cx(re, d.imag());
        }
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

/// Probes one candidate singularity: integrates the augmented system around
/// the closed loop base -> candidate circle -> base, repeating the traversal
/// and accumulating Xi on the left until the trajectory returns to x0 (up to
/// angle periodicity) or the traversal budget runs out.
inline ProbeOutcome probe(const SystemDef& sys, const CVec& x0, Cx t0, Cx candidate,
                          const ProbeOptions& opts) {
    ProbeOutcome outcome;
    outcome.candidate = candidate;

    CPath loop = CPath::point(t0);
    try {
        if (candidate == t0) throw PathError("probe candidate coincides with the base point");
        if (opts.max_traversals < 1) throw PathError("max_traversals must be >= 1");
        loop = loop_around(t0, candidate, opts.radius, opts.clockwise ? -1 : 1, opts.waypoints);
    } catch (const PathError& err) {
        outcome.classification = ProbeClass::Aborted;
        outcome.abort_reason = std::string("loop_construction: ") + err.what();
        return outcome;
    }

    const int n = sys.dimension();
    const CMat id = CMat::Identity(n, n);
    CVec x = x0;
    CMat xi_total = id;
    double dist = std::numeric_limits<double>::quiet_NaN();

    for (int lap = 1; lap <= opts.max_traversals; ++lap) {
        TraceResult res = integrate_augmented(sys, loop, x, id, opts.integrator);
        if (res.aborted) {
            outcome.classification = ProbeClass::Aborted;
            outcome.abort_reason = std::string(to_string(*res.aborted));
            outcome.traversals_used = lap;
            return outcome;
        }
        x = res.end_state.x;
        xi_total = res.end_state.xi * xi_total;
        dist = return_distance(x, x0, sys.angle_indices());
        if (dist <= opts.return_tol) {
            outcome.traversals_used = lap;
            outcome.return_residual = dist;
            if (identity_residual(xi_total) <= opts.matrix_tol) {
                outcome.classification = ProbeClass::Trivial;
            } else {
                outcome.classification = ProbeClass::Generator;
                MonodromyGenerator gen;
                gen.matrix = xi_total;
                gen.loop = loop;
                gen.traversals = lap;
                gen.base_point = t0;
                gen.initial_x = x0;
                gen.candidate = candidate;
                gen.return_residual = dist;
                if (sys.is_hamiltonian()) {
                    gen.det_residual = std::abs(xi_total.determinant() - Cx(1.0, 0.0));
                    const CMat j = symplectic_form(n);
                    gen.symplectic_residual =
                        (xi_total.transpose() * j * xi_total - j).norm();
                }
                outcome.generator = std::move(gen);
            }
            return outcome;
        }
    }

    outcome.classification = ProbeClass::NonReturning;
    outcome.traversals_used = opts.max_traversals;
    outcome.return_residual = dist;
    return outcome;
}

struct ScanDomain {
    double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;
};

struct ScanGrid {
    int nx = 1, ny = 1;
};

struct ScanReport {
    std::string tool_version{kToolVersion};
    std::string system_name;
    std::uint64_t system_hash = 0;
    int dimension = 0;
    bool hamiltonian = false;
    std::vector<int> angle_indices;
    CVec x0;
    Cx t0{};
    std::string mode; // "probe" or "scan"
    std::optional<ScanDomain> domain;
    std::optional<ScanGrid> grid;
    std::vector<Cx> candidates; // row-major grid nodes for scans
    ProbeOptions options;
    std::vector<ProbeOutcome> outcomes;

    std::vector<int> generator_outcome_indices() const {
        std::vector<int> idx;
        for (std::size_t k = 0; k < outcomes.size(); ++k)
            if (outcomes[k].generator) idx.push_back(static_cast<int>(k));
        return idx;
    }

    std::vector<CMat> generator_matrices() const {
        std::vector<CMat> out;
        for (const auto& o : outcomes)
            if (o.generator) out.push_back(o.generator->matrix);
        return out;
    }
};

namespace detail {

inline void run_probes(const SystemDef& sys, const CVec& x0, Cx t0, ScanReport& report,
                       std::span<const std::optional<double>> radii, int jobs) {
    const std::size_t count = report.candidates.size();
    report.outcomes.resize(count);
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= count) return;
            ProbeOptions opts = report.options;
            if (radii[k]) opts.radius = *radii[k];
            Cx cand = report.candidates[k];
            if (std::abs(cand - t0) <= opts.radius) {
                ProbeOutcome skip;
                skip.candidate = cand;
                skip.classification = ProbeClass::Aborted;
                skip.abort_reason = "t0_guard_disk";
                report.outcomes[k] = std::move(skip);
                continue;
            }
            try {
                report.outcomes[k] = probe(sys, x0, t0, cand, opts);
            } catch (const std::exception& err) {
                ProbeOutcome bad;
                bad.candidate = cand;
                bad.classification = ProbeClass::Aborted;
                bad.abort_reason = std::string("probe_failure: ") + err.what();
                report.outcomes[k] = std::move(bad);
            }
        }
    };

    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
}

} // namespace detail

/// Probes an explicit list of candidate points.
inline ScanReport probe_candidates(const SystemDef& sys, const CVec& x0, Cx t0,
                                   std::span<const Cx> candidates, const ProbeOptions& opts,
                                   int jobs = 1) {
    ScanReport report;
    report.system_name = sys.name();
    report.system_hash = sys.definition_hash();
    report.dimension = sys.dimension();
    report.hamiltonian = sys.is_hamiltonian();
    report.angle_indices = sys.angle_indices();
    report.x0 = x0;
    report.t0 = t0;
    report.mode = "probe";
    report.candidates.assign(candidates.begin(), candidates.end());
    report.options = opts;
    std::vector<std::optional<double>> radii(report.candidates.size());
    detail::run_probes(sys, x0, t0, report, radii, jobs);
    return report;
}

/// Probes every node of an nx-by-ny grid over the rectangle, rows ordered by
/// increasing imaginary part, columns by increasing real part. When
/// `radius_override` is empty each probe disk gets 0.45x the grid spacing so
/// that neighbouring disks stay disjoint; nodes whose disk would swallow t0
/// are skipped and reported as aborted.
inline ScanReport scan(const SystemDef& sys, const CVec& x0, Cx t0, const ScanDomain& domain,
                       const ScanGrid& grid, const ProbeOptions& opts,
                       std::optional<double> radius_override = std::nullopt, int jobs = 1) {
    if (grid.nx < 1 || grid.ny < 1) throw SystemError("scan: grid dimensions must be >= 1");
    if (domain.re_max < domain.re_min || domain.im_max < domain.im_min)
        throw SystemError("scan: empty domain rectangle");
    if ((grid.nx > 1 && domain.re_max <= domain.re_min) ||
        (grid.ny > 1 && domain.im_max <= domain.im_min))
        throw SystemError("scan: degenerate domain for the requested grid");

    ScanReport report;
    report.system_name = sys.name();
    report.system_hash = sys.definition_hash();
    report.dimension = sys.dimension();
    report.hamiltonian = sys.is_hamiltonian();
    report.angle_indices = sys.angle_indices();
    report.x0 = x0;
    report.t0 = t0;
    report.mode = "scan";
    report.domain = domain;
    report.grid = grid;
    report.options = opts;

    const double dx = grid.nx > 1 ? (domain.re_max - domain.re_min) / (grid.nx - 1) : 0.0;
    const double dy = grid.ny > 1 ? (domain.im_max - domain.im_min) / (grid.ny - 1) : 0.0;
    double spacing = std::numeric_limits<double>::infinity();
    if (dx > 0.0) spacing = std::min(spacing, dx);
    if (dy > 0.0) spacing = std::min(spacing, dy);
    if (radius_override)
        report.options.radius = *radius_override;
    else if (std::isfinite(spacing))
        report.options.radius = 0.45 * spacing;

    std::vector<std::optional<double>> radii;
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            Cx node(domain.re_min + ix * dx, domain.im_min + iy * dy);
            report.candidates.push_back(node);
            if (radius_override) {
                radii.emplace_back(*radius_override);
            } else if (std::isfinite(spacing)) {
                radii.emplace_back(0.45 * spacing);
            } else {
                radii.emplace_back(0.45 * std::abs(node - t0)); // single-node grid
            }
        }
    }

    detail::run_probes(sys, x0, t0, report, radii, jobs);
    return report;
}

} // namespace monodromy
