#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "monodromy/linalg.hpp"

namespace monodromy {

struct PathError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Segment {
    Cx start{}, end{};
};

/// Circular arc t(u) = center + radius * exp(i*(angle_start + u*angle_sweep)),
/// u in [0, 1]. The sweep is signed (positive = counterclockwise) and may
/// exceed 2*pi for multi-turn loops.
struct Arc {
    Cx center{};
    double radius = 0.0;
    double angle_start = 0.0;
    double angle_sweep = 0.0;
};

using PathPiece = std::variant<Segment, Arc>;

namespace detail {

inline Cx piece_start(const PathPiece& p) {
    if (const auto* s = std::get_if<Segment>(&p)) return s->start;
    const auto& a = std::get<Arc>(p);
    return a.center + a.radius * std::polar(1.0, a.angle_start);
}

inline Cx piece_end(const PathPiece& p) {
    if (const auto* s = std::get_if<Segment>(&p)) return s->end;
    const auto& a = std::get<Arc>(p);
    return a.center + a.radius * std::polar(1.0, a.angle_start + a.angle_sweep);
}

inline double piece_length(const PathPiece& p) {
    if (const auto* s = std::get_if<Segment>(&p)) return std::abs(s->end - s->start);
    const auto& a = std::get<Arc>(p);
    return a.radius * std::abs(a.angle_sweep);
}

inline Cx piece_at(const PathPiece& p, double u) {
    if (const auto* s = std::get_if<Segment>(&p)) return s->start + u * (s->end - s->start);
    const auto& a = std::get<Arc>(p);
    return a.center + a.radius * std::polar(1.0, a.angle_start + u * a.angle_sweep);
}

/// d t / d u on the piece.
inline Cx piece_velocity(const PathPiece& p, double u) {
    if (const auto* s = std::get_if<Segment>(&p)) return s->end - s->start;
    const auto& a = std::get<Arc>(p);
    return Cx(0.0, a.angle_sweep) * a.radius * std::polar(1.0, a.angle_start + u * a.angle_sweep);
}

inline PathPiece piece_reversed(const PathPiece& p) {
    if (const auto* s = std::get_if<Segment>(&p)) return Segment{s->end, s->start};
    const auto& a = std::get<Arc>(p);
    return Arc{a.center, a.radius, a.angle_start + a.angle_sweep, -a.angle_sweep};
}

} // namespace detail

// ---------------------------------------------------------------------------
// A piecewise path in the complex time plane, parametrized by s in [0, 1]
// proportionally to arc length. A zero-length path (a single point) is
// represented by one degenerate segment.
// ---------------------------------------------------------------------------
class CPath {
public:
    explicit CPath(std::vector<PathPiece> pieces) : pieces_(std::move(pieces)) {
        if (pieces_.empty()) throw PathError("path needs at least one piece");
        for (std::size_t k = 1; k < pieces_.size(); ++k) {
            double gap = std::abs(detail::piece_start(pieces_[k]) - detail::piece_end(pieces_[k - 1]));
            if (gap > 1e-12)
                throw PathError("discontinuous path: gap of " + std::to_string(gap) +
                                " between pieces " + std::to_string(k - 1) + " and " +
                                std::to_string(k));
        }
        cumlen_.resize(pieces_.size() + 1, 0.0);
        for (std::size_t k = 0; k < pieces_.size(); ++k)
            cumlen_[k + 1] = cumlen_[k] + detail::piece_length(pieces_[k]);
    }

    static CPath segment(Cx a, Cx b) { return CPath({Segment{a, b}}); }
    static CPath point(Cx a) { return CPath({Segment{a, a}}); }
    static CPath circle(Cx center, double radius, double angle_start, int turns) {
        if (radius <= 0.0) throw PathError("circle radius must be positive");
        if (turns == 0) throw PathError("turn count must be nonzero");
        return CPath({Arc{center, radius, angle_start, 2.0 * std::numbers::pi * turns}});
    }

    const std::vector<PathPiece>& pieces() const { return pieces_; }
    int piece_count() const { return static_cast<int>(pieces_.size()); }
    double length() const { return cumlen_.back(); }
    Cx start() const { return detail::piece_start(pieces_.front()); }
    Cx end() const { return detail::piece_end(pieces_.back()); }
    bool is_closed(double tol = 1e-12) const { return std::abs(end() - start()) <= tol; }

    /// Global parameter range [s_a, s_b] covered by piece k.
    std::pair<double, double> piece_range(int k) const {
        double total = length();
        if (total <= 0.0) return {0.0, 1.0};
        return {cumlen_[static_cast<std::size_t>(k)] / total,
                cumlen_[static_cast<std::size_t>(k) + 1] / total};
    }

    Cx piece_point(int k, double u) const {
        return detail::piece_at(pieces_[static_cast<std::size_t>(k)], u);
    }
    Cx piece_velocity_u(int k, double u) const {
        return detail::piece_velocity(pieces_[static_cast<std::size_t>(k)], u);
    }

    Cx point_at(double s) const {
        auto [k, u] = locate(s);
        return piece_point(k, u);
    }

    /// d t / d s; piecewise constant modulus equal to the total length.
    Cx velocity_at(double s) const {
        auto [k, u] = locate(s);
        double plen = detail::piece_length(pieces_[static_cast<std::size_t>(k)]);
        if (plen <= 0.0) return Cx(0.0, 0.0);
        return piece_velocity_u(k, u) * (length() / plen);
    }

    CPath reversed() const {
        std::vector<PathPiece> rev;
        rev.reserve(pieces_.size());
        for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
            rev.push_back(detail::piece_reversed(*it));
        return CPath(std::move(rev));
    }

private:
    std::pair<int, double> locate(double s) const {
        if (s < -1e-12 || s > 1.0 + 1e-12)
            throw PathError("path parameter out of range: " + std::to_string(s));
        s = std::clamp(s, 0.0, 1.0);
        double total = length();
        if (total <= 0.0) return {0, 0.0};
        double target = s * total;
        auto it = std::upper_bound(cumlen_.begin(), cumlen_.end(), target);
        int k = std::clamp(static_cast<int>(it - cumlen_.begin()) - 1, 0,
                           static_cast<int>(pieces_.size()) - 1);
        // skip zero-length pieces
        while (k + 1 < static_cast<int>(pieces_.size()) &&
               detail::piece_length(pieces_[static_cast<std::size_t>(k)]) <= 0.0)
            ++k;
        double plen = detail::piece_length(pieces_[static_cast<std::size_t>(k)]);
        double u = plen > 0.0 ? (target - cumlen_[static_cast<std::size_t>(k)]) / plen : 0.0;
        return {k, std::clamp(u, 0.0, 1.0)};
    }

    std::vector<PathPiece> pieces_;
    std::vector<double> cumlen_;
};

inline CPath compose(const CPath& a, const CPath& b) {
    if (std::abs(a.end() - b.start()) > 1e-12)
        throw PathError("compose: paths do not join (end of first != start of second)");
    std::vector<PathPiece> pieces = a.pieces();
    pieces.insert(pieces.end(), b.pieces().begin(), b.pieces().end());
    return CPath(std::move(pieces));
}

/// Closed loop from `base`: polyline through `waypoints` to the nearest point
/// of the circle |t - center| = radius, then `turns` full circles
/// (positive = counterclockwise), then the polyline back to `base`.
inline CPath loop_around(Cx base, Cx center, double radius, int turns,
                         std::span<const Cx> waypoints = {}) {
    if (radius <= 0.0) throw PathError("loop radius must be positive");
    if (turns == 0) throw PathError("turn count must be nonzero");
    if (std::abs(base - center) <= radius)
        throw PathError("loop base point lies inside the probe disk");
    for (const Cx& w : waypoints)
        if (std::abs(w - center) <= radius)
            throw PathError("waypoint lies inside the probe disk");

    std::vector<Cx> approach;
    approach.push_back(base);
    for (const Cx& w : waypoints) approach.push_back(w);

    Cx last = approach.back();
    double entry_angle = std::arg(last - center);
    Cx entry = center + radius * std::polar(1.0, entry_angle);

    std::vector<PathPiece> pieces;
    for (std::size_t k = 1; k < approach.size(); ++k) {
        if (std::abs(approach[k] - approach[k - 1]) > 0.0)
            pieces.push_back(Segment{approach[k - 1], approach[k]});
    }
    if (std::abs(entry - last) > 0.0) pieces.push_back(Segment{last, entry});
    pieces.push_back(Arc{center, radius, entry_angle, 2.0 * std::numbers::pi * turns});
    if (std::abs(entry - last) > 0.0) pieces.push_back(Segment{entry, last});
    for (std::size_t k = approach.size(); k-- > 1;) {
        if (std::abs(approach[k] - approach[k - 1]) > 0.0)
            pieces.push_back(Segment{approach[k], approach[k - 1]});
    }
    return CPath(std::move(pieces));
}

inline double distance_to(const CPath& path, Cx z) {
    double best = std::numeric_limits<double>::infinity();
    for (const PathPiece& p : path.pieces()) {
        if (const auto* s = std::get_if<Segment>(&p)) {
            Cx d = s->end - s->start;
            double len2 = std::norm(d);
            double u = len2 > 0.0
                           ? std::clamp(((z - s->start) * std::conj(d)).real() / len2, 0.0, 1.0)
                           : 0.0;
            best = std::min(best, std::abs(z - (s->start + u * d)));
        } else {
            const auto& a = std::get<Arc>(p);
            double rho = std::abs(z - a.center);
            bool covered = std::abs(a.angle_sweep) >= 2.0 * std::numbers::pi;
            if (!covered && rho > 0.0) {
                double phi = std::arg(z - a.center);
                // offset of phi from angle_start in sweep direction, in [0, 2*pi)
                double lo = std::min(0.0, a.angle_sweep), hi = std::max(0.0, a.angle_sweep);
                double rel = std::fmod(phi - a.angle_start, 2.0 * std::numbers::pi);
                for (double cand : {rel, rel + 2.0 * std::numbers::pi, rel - 2.0 * std::numbers::pi})
                    if (cand >= lo && cand <= hi) covered = true;
            }
            if (covered || rho == 0.0) {
                best = std::min(best, std::abs(rho - a.radius));
            } else {
                best = std::min({best, std::abs(z - detail::piece_start(p)),
                                 std::abs(z - detail::piece_end(p))});
            }
        }
    }
    return best;
}

namespace detail {

inline double winding_sweep(const PathPiece& p, Cx z, double u0, double u1, Cx f0, Cx f1,
                            int depth) {
    double d = std::arg(f1 / f0);
    if (std::abs(d) < 1.5 && depth < 60) return d;
    if (depth >= 60) throw PathError("winding_number: point too close to the path");
    double um = 0.5 * (u0 + u1);
    Cx fm = piece_at(p, um) - z;
    if (std::abs(fm) == 0.0) throw PathError("winding_number: point lies on the path");
    return winding_sweep(p, z, u0, um, f0, fm, depth + 1) +
           winding_sweep(p, z, um, u1, fm, f1, depth + 1);
}

} // namespace detail

/// Standard winding number of a closed path around z.
inline int winding_number(const CPath& path, Cx z) {
    if (!path.is_closed()) throw PathError("winding_number: path is not closed");
    if (distance_to(path, z) <= 1e-9) throw PathError("winding_number: point lies on the path");
    double sweep = 0.0;
    for (const PathPiece& p : path.pieces()) {
        if (detail::piece_length(p) <= 0.0) continue;
        // split multi-turn arcs so each chunk subtends less than a half turn
        if (const auto* a = std::get_if<Arc>(&p)) {
            int chunks = std::max(4, static_cast<int>(std::ceil(std::abs(a->angle_sweep))));
            for (int c = 0; c < chunks; ++c) {
                double u0 = static_cast<double>(c) / chunks;
                double u1 = static_cast<double>(c + 1) / chunks;
                sweep += detail::winding_sweep(p, z, u0, u1, detail::piece_at(p, u0) - z,
                                               detail::piece_at(p, u1) - z, 0);
            }
        } else {
            sweep += detail::winding_sweep(p, z, 0.0, 1.0, detail::piece_start(p) - z,
                                           detail::piece_end(p) - z, 0);
        }
    }
    return static_cast<int>(std::llround(sweep / (2.0 * std::numbers::pi)));
}

} // namespace monodromy
