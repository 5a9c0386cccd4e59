#include "support.hpp"

#include <Eigen/Geometry>

#include <distmorph/maps.hpp>
#include <distmorph/oracle.hpp>

using namespace distmorph;
using namespace distmorph::test;

namespace {

DiscreteManifold unit_square_loop() {
    return DiscreteManifold::loop({Point(0, 0, 0), Point(1, 0, 0), Point(1, 1, 0), Point(0, 1, 0)});
}

// Sides 2, 1, 1, 1: only the first edge is stretched.
CorrespondenceMap stretched_square() {
    const double h = std::sqrt(3.0) / 2.0;
    return CorrespondenceMap(unit_square_loop(), {Point(0, 0, 0), Point(2, 0, 0), Point(1.5, h, 0), Point(0.5, h, 0)});
}

} // namespace

TEST_CASE("Jacobian of similarity maps") {
    for (const auto& m : {make_regular_polygon(9), make_unit_square(2), make_tetrahedron(1.0), make_icosphere(2)}) {
        for (double j : jacobian_field(CorrespondenceMap::identity(m)).values) {
            CHECK(j == doctest::Approx(1.0).epsilon(1e-14));
        }
        for (double j : jacobian_field(CorrespondenceMap::scaling(m, 1.5)).values) {
            CHECK(j == doctest::Approx(std::pow(1.5, m.dim())).epsilon(1e-13));
        }
    }
}

TEST_CASE("radial map between icospheres has Jacobian four") {
    const auto s = make_icosphere(3);
    const CorrespondenceMap f(s, positions(make_icosphere(3, 2.0)));
    for (double j : jacobian_field(f).values) {
        CHECK(std::abs(j - 4.0) < 1e-12);
    }
    CHECK(rel_err(total_distortion_map(f), 9.0 * total_volume(s)) < 1e-12);
    const MinimalityReport rep = is_minimal_map(f, 1e-9);
    CHECK(rep.minimal);
    CHECK(rep.max_deviation < 1e-12);
    CHECK(rep.ratio == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("single stretched edge") {
    const CorrespondenceMap f = stretched_square();
    const JacobianField field = jacobian_field(f);
    CHECK(field.values[0] == doctest::Approx(2.0).epsilon(1e-14));
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(field.values[i] == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(total_distortion_map(f) == doctest::Approx(1.0).epsilon(1e-14));
    const MinimalityReport rep = is_minimal_map(f, 1e-3);
    CHECK_FALSE(rep.minimal);
    CHECK(rep.worst_simplex == 0);
    CHECK(rep.max_deviation == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(total_distortion_map(CorrespondenceMap::identity(unit_square_loop())) == 0.0);
}

TEST_CASE("phi_min values") {
    CHECK(phi_min(3.0, 3.0) == 0.0);
    CHECK(rel_err(phi_min(4 * pi, 16 * pi), 36 * pi) < 1e-15);
    CHECK(rel_err(phi_min(2 * pi, 8 * pi), 18 * pi) < 1e-15);
    CHECK(rel_err(phi_min(4 * pi, 16 * pi), 113.09733552923255) < 1e-14);
    CHECK(error_code_of([] { phi_min(0.0, 1.0); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { phi_min(1.0, -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("orientation reversal and degenerate images are detected") {
    SUBCASE("mirrored loop") {
        const auto m = make_regular_polygon(8);
        std::vector<Point> mirrored;
        for (const auto& p : m.vertices()) {
            mirrored.emplace_back(-p.x(), p.y(), 0.0);
        }
        CHECK(error_code_of([&] { jacobian_field(CorrespondenceMap(m, mirrored)); }) ==
              ErrorCode::OrientationReversal);
    }
    SUBCASE("mirrored sphere") {
        const auto m = make_icosphere(1);
        std::vector<Point> mirrored;
        for (const auto& p : m.vertices()) {
            mirrored.emplace_back(-p.x(), p.y(), p.z());
        }
        CHECK(error_code_of([&] { jacobian_field(CorrespondenceMap(m, mirrored)); }) ==
              ErrorCode::OrientationReversal);
    }
    SUBCASE("one vertex pushed through the sphere") {
        const auto m = make_icosphere(1);
        auto pts = positions(m);
        pts[0] = -0.9 * pts[0];
        CHECK(error_code_of([&] { jacobian_field(CorrespondenceMap(m, pts)); }) == ErrorCode::OrientationReversal);
    }
    SUBCASE("collapsed edge") {
        const auto m = make_regular_polygon(8);
        auto pts = positions(m);
        pts[3] = pts[2];
        try {
            jacobian_field(CorrespondenceMap(m, pts));
            FAIL("expected an error");
        }
        catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateImage);
            REQUIRE(e.index().has_value());
            CHECK(*e.index() == 2);
        }
    }
}

TEST_CASE("composition and inversion") {
    const auto s = make_icosphere(2);
    const CorrespondenceMap f = CorrespondenceMap::scaling(s, 2.0);
    const CorrespondenceMap g = CorrespondenceMap::scaling(f.image(), 3.0);
    for (double j : jacobian_field(compose(f, g)).values) {
        CHECK(j == doctest::Approx(36.0).epsilon(1e-12));
    }
    for (double j : jacobian_field(invert(f)).values) {
        CHECK(j == doctest::Approx(0.25).epsilon(1e-12));
    }

    const CorrespondenceMap r = random_map(make_regular_polygon(32), 3, 0.3);
    const CorrespondenceMap composed = compose(CorrespondenceMap::identity(r.source()), r);
    for (std::size_t i = 0; i < r.source().vertex_count(); ++i) {
        CHECK((composed.target_positions()[i] - r.target_positions()[i]).norm() == 0.0);
    }
    CHECK(error_code_of([&] { compose(f, f); }) == ErrorCode::IncompatibleMaps);
    CHECK(error_code_of([&] { compose(f, CorrespondenceMap::identity(make_icosphere(1))); }) ==
          ErrorCode::IncompatibleMaps);
}

TEST_CASE("Jacobian integral equals the image volume") {
    for (const auto& m : {make_regular_polygon(64), make_unit_square(4), make_icosphere(2)}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const CorrespondenceMap g = random_map(m, seed, 0.4);
            CHECK(rel_err(jacobian_field(g).integral(), total_volume(g.image())) < 1e-12);
        }
    }
}

TEST_CASE("total distortion is bounded below by phi_min") {
    const auto circle = make_regular_polygon(64);
    const double vm = total_volume(circle);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const CorrespondenceMap slide = random_map(circle, seed, 0.45);
        const double stretch = 1.0 + 0.05 * static_cast<double>(seed);
        std::vector<Point> pts;
        for (const auto& p : slide.target_positions()) {
            pts.emplace_back(stretch * p.x(), p.y(), 0.0);
        }
        const CorrespondenceMap g(circle, pts);
        CHECK(total_distortion_map(g) >= phi_min(vm, total_volume(g.image())) - 1e-9);
    }
    const auto sphere = make_icosphere(2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const CorrespondenceMap g = swirl_map(sphere, seed, 0.5, 1.0 + 0.2 * static_cast<double>(seed));
        CHECK(total_distortion_map(g) >= phi_min(total_volume(sphere), total_volume(g.image())) - 1e-9);
    }
}

TEST_CASE("distortion is invariant under rigid motions of the image") {
    const CorrespondenceMap g = random_map(make_icosphere(2), 9, 0.3);
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(1.1, Point(1, -2, 0.5).normalized()).toRotationMatrix();
    std::vector<Point> moved;
    for (const auto& p : g.target_positions()) {
        moved.push_back(rot * p + Point(4, 5, 6));
    }
    CHECK(rel_err(total_distortion_map(CorrespondenceMap(g.source(), moved)), total_distortion_map(g)) < 1e-10);
}

TEST_CASE("map construction checks vertex counts") {
    CHECK(error_code_of([] { CorrespondenceMap(make_regular_polygon(5), positions(make_regular_polygon(6))); }) ==
          ErrorCode::IncompatibleMaps);
    CHECK(error_code_of([] { CorrespondenceMap::scaling(make_regular_polygon(5), 0.0); }) ==
          ErrorCode::InvalidArgument);
}
