#include "support.hpp"

#include <Eigen/Geometry>

#include <distmorph/oracle.hpp>

using namespace distmorph;
using namespace distmorph::test;

TEST_CASE("simplex measures") {
    const auto edge = DiscreteManifold::loop({Point(0, 0, 0), Point(3, 4, 0), Point(-1, 2, 0)});
    CHECK(simplex_measure(edge, 0) == doctest::Approx(5.0).epsilon(1e-15));

    const auto tri = DiscreteManifold::mesh({Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)}, {{{0, 1, 2}}, {{0, 2, 1}}});
    CHECK(simplex_measure(tri, 0) == doctest::Approx(0.5).epsilon(1e-15));

    const auto tet = make_tetrahedron(1.0);
    for (std::size_t f = 0; f < 4; ++f) {
        CHECK(simplex_measure(tet, f) == doctest::Approx(std::sqrt(3.0) / 4.0).epsilon(1e-14));
    }
    CHECK(error_code_of([&] { simplex_measure(tet, 4); }) == ErrorCode::InvalidIndex);
}

TEST_CASE("degenerate simplices are rejected by measure queries") {
    const auto m = DiscreteManifold::loop({Point(0, 0, 0), Point(1, 0, 0), Point(1, 0, 0), Point(0, 1, 0)});
    CHECK(error_code_of([&] { simplex_measure(m, 1); }) == ErrorCode::DegenerateSimplex);
    CHECK(error_code_of([&] { simplex_measures(m); }) == ErrorCode::DegenerateSimplex);
}

TEST_CASE("total volume of fixtures") {
    CHECK(total_volume(DiscreteManifold::loop({Point(0, 0, 0), Point(1, 0, 0), Point(1, 1, 0), Point(0, 1, 0)})) ==
          doctest::Approx(4.0).epsilon(1e-15));
    CHECK(total_volume(make_unit_square(5)) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(total_volume(make_tetrahedron(1.0)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    // Inscribed-polygon perimeter 2 N sin(pi / N).
    CHECK(rel_err(total_volume(make_regular_polygon(64)), 128.0 * std::sin(pi / 64.0)) < 1e-14);
    CHECK(rel_err(total_volume(make_regular_polygon(64)), 6.2806623139) < 1e-10);
}

TEST_CASE("construction rejects unusable input") {
    CHECK(error_code_of([] { DiscreteManifold::loop({Point(0, 0, 0)}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] {
              DiscreteManifold::mesh({Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)}, {{{0, 1, 3}}});
          }) == ErrorCode::InvalidIndex);
    CHECK(error_code_of([] { DiscreteManifold::mesh({Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)}, {}); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("validation reports each violated invariant") {
    SUBCASE("square loop passes") {
        const Diagnostics d = validate(make_unit_square(1));
        CHECK(d.ok());
        CHECK(d.checks.size() == 4);
    }
    SUBCASE("mesh with a face removed is not closed") {
        const auto tet = make_tetrahedron(1.0);
        std::vector<Face> faces(tet.faces().begin(), tet.faces().end() - 1);
        const Diagnostics d = validate(DiscreteManifold::mesh(positions(tet), faces));
        REQUIRE(d.find("closed") != nullptr);
        CHECK_FALSE(d.find("closed")->passed);
        CHECK(d.find("closed")->edges.size() == 3);
        CHECK(error_code_of([&] { require_valid(DiscreteManifold::mesh(positions(tet), faces)); }) ==
              ErrorCode::ValidationFailure);
    }
    SUBCASE("zero-area triangle is reported with its id") {
        auto pts = positions(make_tetrahedron(1.0));
        const auto tet = make_tetrahedron(1.0);
        // Collapse vertex 3 onto the midpoint of edge (0, 1): faces touching
        // 3 and both 0 and 1 become flat.
        pts[3] = 0.5 * (pts[0] + pts[1]);
        const Diagnostics d = validate(DiscreteManifold::mesh(pts, {tet.faces().begin(), tet.faces().end()}));
        REQUIRE(d.find("non-degenerate") != nullptr);
        CHECK_FALSE(d.find("non-degenerate")->passed);
        CHECK_FALSE(d.find("non-degenerate")->ids.empty());
    }
    SUBCASE("flipped face breaks orientation") {
        const auto tet = make_tetrahedron(1.0);
        std::vector<Face> faces(tet.faces().begin(), tet.faces().end());
        std::swap(faces[0][1], faces[0][2]);
        const Diagnostics d = validate(DiscreteManifold::mesh(positions(tet), faces));
        CHECK_FALSE(d.find("oriented")->passed);
    }
    SUBCASE("two disjoint tetrahedra are not connected") {
        const auto tet = make_tetrahedron(1.0);
        auto pts = positions(tet);
        std::vector<Face> faces(tet.faces().begin(), tet.faces().end());
        for (std::size_t i = 0; i < 4; ++i) {
            pts.push_back(tet.vertex(i) + Point(5, 0, 0));
        }
        for (const Face& f : tet.faces()) {
            faces.push_back({f[0] + 4, f[1] + 4, f[2] + 4});
        }
        const Diagnostics d = validate(DiscreteManifold::mesh(pts, faces));
        CHECK(d.find("closed")->passed);
        CHECK_FALSE(d.find("connected")->passed);
    }
}

TEST_CASE("icosphere construction") {
    for (int k = 0; k <= 3; ++k) {
        const auto s = make_icosphere(k);
        const auto four_k = static_cast<std::size_t>(1) << (2 * k);
        CHECK(s.vertex_count() == 10 * four_k + 2);
        CHECK(s.simplex_count() == 20 * four_k);
        CHECK(validate(s).ok());
        CHECK(signed_enclosed_volume(s) > 0.0);
        for (const auto& p : s.vertices()) {
            CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    CHECK(signed_enclosed_volume(make_tetrahedron(2.0)) > 0.0);
    CHECK(signed_enclosed_volume(make_regular_polygon(12)) > 0.0);
}

TEST_CASE("volume is invariant under rigid motions") {
    SplitMix64 rng(42);
    const std::vector<DiscreteManifold> fixtures = {make_unit_square(3), make_regular_polygon(64),
                                                    make_tetrahedron(1.3), make_icosphere(2)};
    for (const auto& m : fixtures) {
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::Matrix3d rot;
            Point shift(rng.symmetric() * 10, rng.symmetric() * 10, 0.0);
            if (m.dim() == 1) {
                rot = Eigen::AngleAxisd(pi * rng.symmetric(), Point::UnitZ()).toRotationMatrix();
            }
            else {
                const Point axis = Point(rng.symmetric(), rng.symmetric(), rng.symmetric() + 2.0).normalized();
                rot = Eigen::AngleAxisd(pi * rng.symmetric(), axis).toRotationMatrix();
                shift.z() = rng.symmetric() * 10;
            }
            std::vector<Point> moved;
            for (const auto& p : m.vertices()) {
                moved.push_back(rot * p + shift);
            }
            CHECK(rel_err(total_volume(m.with_positions(moved)), total_volume(m)) < 1e-12);
        }
    }
}

TEST_CASE("volume scales with the n-th power of a similarity") {
    for (const auto& m : {make_regular_polygon(17), make_icosphere(1)}) {
        for (double alpha : {0.5, 2.0, 3.7}) {
            std::vector<Point> scaled;
            for (const auto& p : m.vertices()) {
                scaled.push_back(alpha * p + Point(1, 2, m.dim() == 1 ? 0.0 : 3.0));
            }
            CHECK(rel_err(total_volume(m.with_positions(scaled)), std::pow(alpha, m.dim()) * total_volume(m)) < 1e-12);
        }
    }
}

TEST_CASE("with_positions keeps combinatorics") {
    const auto s = make_icosphere(1);
    auto pts = positions(s);
    for (auto& p : pts) {
        p *= 2.0;
    }
    const auto t = s.with_positions(pts);
    CHECK(s.same_combinatorics(t));
    CHECK_FALSE(s.same_combinatorics(make_icosphere(2)));
    CHECK_FALSE(make_regular_polygon(5).same_combinatorics(make_regular_polygon(6)));
    CHECK(error_code_of([&] { s.with_positions({Point::Zero()}); }) == ErrorCode::IncompatibleMaps);
}

TEST_CASE("planar loops drop the z coordinate") {
    const auto m = DiscreteManifold::loop({Point(0, 0, 1), Point(1, 0, 2), Point(0, 1, 3)});
    for (const auto& p : m.vertices()) {
        CHECK(p.z() == 0.0);
    }
    const std::vector<Eigen::Vector2d> flat = {{0, 0}, {2, 0}, {0, 2}};
    CHECK(total_volume(DiscreteManifold::loop(std::span<const Eigen::Vector2d>(flat))) ==
          doctest::Approx(4.0 + 2.0 * std::sqrt(2.0)));
}
