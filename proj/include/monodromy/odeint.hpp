#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monodromy/cpath.hpp"
#include "monodromy/expr.hpp"
#include "monodromy/linalg.hpp"
#include "monodromy/system.hpp"

namespace monodromy {

struct IntegratorOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    long long max_steps = 10'000'000;
    /// When positive, states are recorded at s = 0, stride, 2*stride, ..., 1.
    double checkpoint_stride = 0.0;
    /// Initial step in path parameter s; 0 selects it automatically.
    double initial_step = 0.0;
    /// Abort once an accepted step falls below this fraction of the path.
    double singularity_guard = 1e-13;
};

enum class AbortReason { SingularityProximity, Overflow, MaxSteps };

inline std::string_view to_string(AbortReason r) {
    switch (r) {
        case AbortReason::SingularityProximity: return "singularity_proximity";
        case AbortReason::Overflow: return "overflow";
        case AbortReason::MaxSteps: return "max_steps";
    }
    return "?";
}

struct AugmentedState {
    CVec x;
    CMat xi;
};

struct TraceResult {
    AugmentedState end_state;
    double est_global_error = 0.0;
    double min_step_taken = 0.0;
    long long accepted_steps = 0;
    long long rejected_steps = 0;
    std::optional<AbortReason> aborted;
    std::string abort_detail;
    std::vector<std::pair<double, AugmentedState>> checkpoints;

    const std::vector<std::pair<double, AugmentedState>>& dense_checkpoints() const {
        return checkpoints;
    }
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    // b5 - b4: weights of the embedded error estimate
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct PieceStats {
    double est_err = 0.0;
    double min_h = std::numeric_limits<double>::infinity();
    long long accepted = 0;
    long long rejected = 0;
    std::optional<AbortReason> aborted;
    std::string detail;
};

struct StopPoint {
    double u;
    bool checkpoint;
};

inline double scaled_rms(const CVec& v, const CVec& ya, const CVec& yb, double rel, double abs) {
    double acc = 0.0;
    const auto n = v.size();
    for (Eigen::Index k = 0; k < n; ++k) {
        double sc = std::max(abs, rel * std::max(std::abs(ya[k]), std::abs(yb[k])));
        double q = std::abs(v[k]) / sc;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

/// One smooth piece, integrated adaptively over u in [0, 1]. `stops` must be
/// sorted, end with u = 1, and is landed on exactly. `s_scale` converts u
/// steps to global s steps for the guards and bookkeeping.
template <class RHS, class OnStop>
void rk45_piece(RHS&& f, CVec& y, std::span<const StopPoint> stops, const IntegratorOptions& opts,
                double s_scale, long long& budget, PieceStats& st, OnStop&& on_stop) {
    using tab = Dopri5;
    const auto n = y.size();
    CVec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n), err(n);

    auto eval = [&](double u, const CVec& yy, CVec& out) -> bool {
        try {
            f(u, yy, out);
        } catch (const EvalError&) {
            return false;
        }
        return all_finite(out);
    };

    double u = 0.0;
    std::size_t next_stop = 0;

    if (!eval(0.0, y, k1)) {
        st.aborted = AbortReason::Overflow;
        st.detail = "right-hand side not finite at the start of a path piece";
        return;
    }

    // automatic initial step (rough Hairer-style estimate)
    double h;
    if (opts.initial_step > 0.0) {
        h = std::min(opts.initial_step / s_scale, 1.0);
    } else {
        double d0 = scaled_rms(y, y, y, opts.rel_tol, opts.abs_tol);
        double d1 = scaled_rms(k1, y, y, opts.rel_tol, opts.abs_tol);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, 1.0);
        double h1 = h0;
        yt = y + h0 * k1;
        if (eval(h0, yt, k2)) {
            double d2 = scaled_rms(k2 - k1, y, y, opts.rel_tol, opts.abs_tol) / h0;
            double dm = std::max(d1, d2);
            h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        } else {
            h1 = h0 * 1e-3;
        }
        h = std::min({100.0 * h0, h1, 1.0});
    }
    h = std::max(h, 1e-300);

    constexpr double safety = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double fac_min = 0.2, fac_max = 10.0;
    double facold = 1e-4;
    bool last_rejected = false;

    while (u < 1.0) {
        if (--budget < 0) {
            st.aborted = AbortReason::MaxSteps;
            st.detail = "maximum number of integration steps exceeded";
            return;
        }
        double target = stops[next_stop].u;
        bool clipped = false;
        if (u + h >= target) {
            h = target - u;
            clipped = true;
        }
        if (u + h == u) {
            st.aborted = AbortReason::SingularityProximity;
            st.detail = "step size underflow at s-fraction " + std::to_string(u);
            return;
        }

        bool ok = true;
        ok = ok && (yt = y + h * (tab::a21 * k1), eval(u + tab::c2 * h, yt, k2));
        ok = ok && (yt = y + h * (tab::a31 * k1 + tab::a32 * k2), eval(u + tab::c3 * h, yt, k3));
        ok = ok && (yt = y + h * (tab::a41 * k1 + tab::a42 * k2 + tab::a43 * k3),
                    eval(u + tab::c4 * h, yt, k4));
        ok = ok && (yt = y + h * (tab::a51 * k1 + tab::a52 * k2 + tab::a53 * k3 + tab::a54 * k4),
                    eval(u + tab::c5 * h, yt, k5));
        ok = ok && (yt = y + h * (tab::a61 * k1 + tab::a62 * k2 + tab::a63 * k3 + tab::a64 * k4 +
                                  tab::a65 * k5),
                    eval(u + h, yt, k6));
        ok = ok && (ynew = y + h * (tab::a71 * k1 + tab::a73 * k3 + tab::a74 * k4 + tab::a75 * k5 +
                                    tab::a76 * k6),
                    eval(u + h, ynew, k7));

        if (!ok) {
            // a stage hit a singular or non-finite value: retry with a smaller step
            st.rejected += 1;
            last_rejected = true;
            h *= 0.25;
            if (h * s_scale < opts.singularity_guard) {
                st.aborted = AbortReason::SingularityProximity;
                st.detail = "step size underflow near a singular point, s-fraction " +
                            std::to_string(u);
                return;
            }
            continue;
        }

        err = h * (tab::e1 * k1 + tab::e3 * k3 + tab::e4 * k4 + tab::e5 * k5 + tab::e6 * k6 +
                   tab::e7 * k7);
        double err_norm = scaled_rms(err, y, ynew, opts.rel_tol, opts.abs_tol);

        if (!std::isfinite(err_norm) || err_norm > 1.0) {
            st.rejected += 1;
            last_rejected = true;
            double fac11 = std::isfinite(err_norm) ? std::pow(err_norm, expo1) : 10.0;
            h /= std::min(1.0 / fac_min, fac11 / safety);
            if (h * s_scale < opts.singularity_guard) {
                st.aborted = AbortReason::SingularityProximity;
                st.detail = "step size underflow (error control), s-fraction " + std::to_string(u);
                return;
            }
            continue;
        }

        // accepted
        st.accepted += 1;
        st.min_h = std::min(st.min_h, h * s_scale);
        st.est_err += err.norm() / std::sqrt(static_cast<double>(n));
        if (!clipped && h * s_scale < opts.singularity_guard) {
            y = ynew;
            st.aborted = AbortReason::SingularityProximity;
            st.detail = "accepted step fell below the singularity guard at s-fraction " +
                        std::to_string(u);
            return;
        }

        double fac11 = std::pow(err_norm, expo1);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(1.0 / fac_max, std::min(1.0 / fac_min, fac / safety));
        double hnew = h / fac;
        facold = std::max(err_norm, 1e-4);
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;

        y.swap(ynew);
        k1.swap(k7); // FSAL
        if (clipped) {
            u = target;
            while (next_stop < stops.size() && stops[next_stop].u <= u) {
                on_stop(stops[next_stop]);
                ++next_stop;
            }
        } else {
            u += h;
        }
        h = hnew;
    }
}

} // namespace detail

/// Analytic continuation of the augmented system  dx/dt = v(x, t),
/// dXi/dt = A(x, t) * Xi  along `path`, integrating in the path parameter s
/// with the dt/ds factor applied. Xi rides along x inside one error budget.
inline TraceResult integrate_augmented(const SystemDef& sys, const CPath& path, const CVec& x0,
                                       const CMat& xi0, const IntegratorOptions& opts = {}) {
    const int n = sys.dimension();
    if (x0.size() != n) throw SystemError("integrate_augmented: state dimension mismatch");
    if (xi0.rows() != n || xi0.cols() != n)
        throw SystemError("integrate_augmented: variational matrix dimension mismatch");
    if (opts.rel_tol <= 0.0 || opts.abs_tol <= 0.0)
        throw SystemError("integrate_augmented: tolerances must be positive");

    const Eigen::Index N = n + static_cast<Eigen::Index>(n) * n;
    CVec y(N);
    y.head(n) = x0;
    Eigen::Map<CMat>(y.data() + n, n, n) = xi0;

    auto unpack = [n](const CVec& yy) {
        AugmentedState st;
        st.x = yy.head(n);
        st.xi = Eigen::Map<const CMat>(yy.data() + n, n, n);
        return st;
    };

    TraceResult result;
    result.checkpoints.emplace_back(0.0, unpack(y));

    std::vector<double> marks;
    if (opts.checkpoint_stride > 0.0) {
        for (long long j = 1; j * opts.checkpoint_stride < 1.0 - 1e-12; ++j)
            marks.push_back(j * opts.checkpoint_stride);
        marks.push_back(1.0);
    }

    const double total = path.length();
    if (total <= 0.0) {
        result.end_state = unpack(y);
        return result;
    }

    std::vector<Cx> env(static_cast<std::size_t>(n) + 1);
    CVec v(n);
    CMat a(n, n);
    long long budget = opts.max_steps;
    std::size_t next_mark = 0;

    for (int k = 0; k < path.piece_count(); ++k) {
        auto [sa, sb] = path.piece_range(k);
        if (sb <= sa) continue;

        auto rhs = [&](double u, const CVec& yy, CVec& dy) {
            Cx t = path.piece_point(k, u);
            Cx tv = path.piece_velocity_u(k, u);
            for (int j = 0; j < n; ++j) env[static_cast<std::size_t>(j)] = yy[j];
            env.back() = t;
            sys.eval_rhs(env, v);
            sys.eval_jacobian(env, a);
            dy.resize(N);
            dy.head(n) = tv * v;
            Eigen::Map<CMat>(dy.data() + n, n, n).noalias() =
                tv * (a * Eigen::Map<const CMat>(yy.data() + n, n, n));
        };

        std::vector<detail::StopPoint> stops;
        while (next_mark < marks.size() && marks[next_mark] <= sb + 1e-14) {
            double u = (marks[next_mark] - sa) / (sb - sa);
            if (u > 1e-14) {
                stops.push_back({std::min(u, 1.0), true});
            } else {
                // mark coincides with the piece start (zero-length predecessor)
                result.checkpoints.emplace_back(marks[next_mark], unpack(y));
            }
            ++next_mark;
        }
        if (stops.empty() || stops.back().u < 1.0 - 1e-14) stops.push_back({1.0, false});
        else stops.back().u = 1.0;

        detail::PieceStats st;
        auto on_stop = [&](const detail::StopPoint& sp) {
            if (sp.checkpoint)
                result.checkpoints.emplace_back(sa + sp.u * (sb - sa), unpack(y));
        };
        detail::rk45_piece(rhs, y, stops, opts, sb - sa, budget, st, on_stop);

        result.est_global_error += st.est_err;
        if (st.accepted > 0)
            result.min_step_taken = result.min_step_taken == 0.0
                                        ? st.min_h
                                        : std::min(result.min_step_taken, st.min_h);
        result.accepted_steps += st.accepted;
        result.rejected_steps += st.rejected;
        if (st.aborted) {
            result.aborted = st.aborted;
            result.abort_detail = st.detail;
            break;
        }
    }

    // headroom for error transport along the flow
    result.est_global_error *= 10.0;
    result.end_state = unpack(y);
    return result;
}

} // namespace monodromy
