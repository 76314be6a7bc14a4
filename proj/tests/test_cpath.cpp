#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "monodromy/cpath.hpp"
#include "testutil.hpp"

using namespace monodromy;
using std::numbers::pi;

TEST_CASE("point_at: segments, circles, closure") {
    CPath seg = CPath::segment(Cx(0, 0), Cx(2, 0));
    CHECK(std::abs(seg.point_at(0.5) - Cx(1, 0)) < 1e-15);
    CHECK_THROWS_AS(seg.point_at(1.5), PathError);
    CHECK_THROWS_AS(seg.point_at(-0.2), PathError);

    CPath circle = CPath::circle(Cx(0, 0), 1.0, 0.0, 1);
    CHECK(std::abs(circle.point_at(0.25) - Cx(0, 1)) < 1e-14);
    CHECK(circle.is_closed());

    CPath loop = loop_around(Cx(1, 0), Cx(0.2, 2.5), 0.4, 1);
    CHECK(std::abs(loop.point_at(0.0) - Cx(1, 0)) < 1e-15);
    CHECK(std::abs(loop.point_at(1.0) - Cx(1, 0)) < 1e-15);
    CHECK(loop.is_closed());
}

TEST_CASE("loop_around windings and validation") {
    CPath a = loop_around(Cx(1, 0), Cx(0.2, 2.5), 0.4, 1);
    CHECK(winding_number(a, Cx(0.2, 2.5)) == 1);
    CHECK(winding_number(a, Cx(0.2, -2.5)) == 0);

    CPath b = loop_around(Cx(0, 0), Cx(4.8, 0.8), 0.3, 2);
    CHECK(winding_number(b, Cx(4.8, 0.8)) == 2);

    CPath c = loop_around(Cx(0, 0), Cx(1, 1), 0.25, -1);
    CHECK(winding_number(c, Cx(1, 1)) == -1);

    CHECK_THROWS_AS(loop_around(Cx(0, 0), Cx(1, 0), 2.0, 1), PathError);   // base inside
    CHECK_THROWS_AS(loop_around(Cx(3, 0), Cx(1, 0), 0.5, 0), PathError);   // zero turns
    CHECK_THROWS_AS(loop_around(Cx(3, 0), Cx(1, 0), -0.5, 1), PathError);  // bad radius
    std::vector<Cx> bad_wp{Cx(1.1, 0)};
    CHECK_THROWS_AS(loop_around(Cx(3, 0), Cx(1, 0), 0.5, 1, bad_wp), PathError);
}

TEST_CASE("waypoints route the approach") {
    std::vector<Cx> wps{Cx(0, 2), Cx(2, 3)};
    CPath loop = loop_around(Cx(0, 0), Cx(2, 0.5), 0.3, 1, wps);
    CHECK(loop.is_closed());
    CHECK(winding_number(loop, Cx(2, 0.5)) == 1);
    CHECK(winding_number(loop, Cx(-1, -1)) == 0);
}

TEST_CASE("compose joins and rejects mismatches") {
    CPath g = loop_around(Cx(0, 0), Cx(1, 1), 0.3, 1);
    CPath closed = compose(g, g.reversed());
    CHECK(closed.is_closed());
    CHECK(winding_number(closed, Cx(1, 1)) == 0);
    CHECK(winding_number(closed, Cx(0.5, 0.5)) == 0);

    CPath h = loop_around(Cx(0, 0), Cx(-1, 1), 0.3, 1);
    CPath both = compose(g, h);
    CHECK(both.is_closed());
    CHECK(winding_number(both, Cx(1, 1)) == 1);
    CHECK(winding_number(both, Cx(-1, 1)) == 1);

    CPath elsewhere = CPath::segment(Cx(5, 5), Cx(6, 6));
    CHECK_THROWS_AS(compose(g, elsewhere), PathError);
}

TEST_CASE("winding_number rejects points on the path") {
    CPath circle = CPath::circle(Cx(0, 0), 1.0, 0.0, 1);
    CHECK(winding_number(circle, Cx(0, 0)) == 1);
    CHECK(winding_number(circle, Cx(3, 0)) == 0);
    CHECK_THROWS_AS(winding_number(circle, Cx(1, 0)), PathError);
    CHECK_THROWS_AS(winding_number(CPath::segment(Cx(0, 0), Cx(1, 0)), Cx(0.5, 1)), PathError);
}

TEST_CASE("arc-length parametrization is Lipschitz with constant length") {
    std::mt19937 rng(4242u);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Cx> wps{Cx(0.5, 1.5)};
    CPath loop = loop_around(Cx(0, 0), Cx(2, 2), 0.7, 2, wps);
    const double len = loop.length();
    for (int k = 0; k < 300; ++k) {
        double s = u(rng);
        double delta = u(rng) * (1.0 - s);
        double hop = std::abs(loop.point_at(s + delta) - loop.point_at(s));
        CHECK(hop <= (len + 1e-9) * delta + 1e-12);
    }
}

TEST_CASE("velocity matches difference quotients") {
    CPath loop = loop_around(Cx(0, 0), Cx(1.5, 0.5), 0.4, 1);
    for (double s : {0.03, 0.21, 0.5, 0.77, 0.96}) {
        double h = 1e-7;
        Cx fd = (loop.point_at(s + h) - loop.point_at(s - h)) / (2 * h);
        CHECK(std::abs(fd - loop.velocity_at(s)) < 1e-5 * loop.length());
    }
}

TEST_CASE("winding of grid points away from a probe loop vanishes") {
    CPath loop = loop_around(Cx(0, 0), Cx(1, 1), 0.2, 1);
    for (double re = -2; re <= 3.01; re += 0.5) {
        for (double im = -2; im <= 3.01; im += 0.5) {
            Cx z(re, im);
            if (std::abs(z - Cx(1, 1)) < 0.25) continue;
            if (distance_to(loop, z) < 0.05) continue;
            CHECK(winding_number(loop, z) == (std::abs(z - Cx(1, 1)) < 0.2 ? 1 : 0));
        }
    }
}
