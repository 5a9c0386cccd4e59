#include "support.hpp"

#include <distmorph/maps.hpp>
#include <distmorph/morph.hpp>
#include <distmorph/oracle.hpp>

using namespace distmorph;
using namespace distmorph::test;

namespace {

MoserSolveOptions exact() {
    MoserSolveOptions o;
    o.rel_tol = 1e-9;
    return o;
}

// Frames (t + 1)^2 M: volumes p (t + 1)^2, the optimal schedule from p to 4p.
Morph minimal_circle_morph(std::size_t count, std::vector<double> times) {
    return scaled_morph(make_regular_polygon(count), times, [](double t) { return (t + 1) * (t + 1); });
}

Morph static_morph(const DiscreteManifold& m, std::size_t frames) {
    return scaled_morph(m, uniform_times(frames), [](double) { return 1.0; });
}

} // namespace

TEST_CASE("morph construction validates the time grid and frames") {
    const auto m = make_regular_polygon(6);
    const auto pts = positions(m);
    auto try_times = [&](std::vector<double> times) {
        return Morph(m, times, std::vector<std::vector<Point>>(times.size(), pts));
    };
    CHECK_NOTHROW(try_times({0.0, 0.5, 1.0}));
    try {
        try_times({0.0, 0.5, 0.5, 1.0});
        FAIL("expected an error");
    }
    catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
        CHECK(e.index() == std::optional<std::size_t>(2));
    }
    CHECK(error_code_of([&] { try_times({0.1, 1.0}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { try_times({0.0, 0.9}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { try_times({0.0}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { Morph(m, {0.0, 1.0}, {pts}); }) == ErrorCode::InvalidArgument);

    auto shifted = pts;
    shifted[0].x() += 0.1;
    CHECK(error_code_of([&] { Morph(m, {0.0, 1.0}, {shifted, pts}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { Morph(m, {0.0, 1.0}, {pts, {pts.begin(), pts.end() - 1}}); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("pairwise energy") {
    const Morph h = random_morph(make_regular_polygon(32), 4, 21, 0.4, 2.0);
    CHECK(pairwise_energy(h, 7, 7) == 0.0);
    CHECK(rel_err(pairwise_energy(h, 0, 20), total_distortion_map(h.frame_map(20))) < 1e-12);

    // Constant transition Jacobian between volumes p and 4p gives (p - 4p)^2 / p.
    const Morph m = scaling_morph(make_regular_polygon(64), 4.0, 11);
    const double p = total_volume(m.source());
    CHECK(rel_err(pairwise_energy(m, 0, 10), 9.0 * p) < 1e-12);
    const double vs = total_volume(m.frame(3));
    const double vt = total_volume(m.frame(8));
    CHECK(rel_err(pairwise_energy(m, 3, 8), (vs - vt) * (vs - vt) / vs) < 1e-12);
    CHECK(error_code_of([&] { pairwise_energy(m, 0, 11); }) == ErrorCode::InvalidIndex);
}

TEST_CASE("infinitesimal distortion of the optimal circle morph") {
    const Morph h = minimal_circle_morph(64, uniform_times(41));
    const double p = total_volume(h.source());
    // eps = phi'^2 / phi = 4 p; the stencils are exact on the quadratic J.
    for (std::size_t k = 0; k < h.frame_count(); ++k) {
        CHECK(rel_err(infinitesimal_distortion(h, k), 4.0 * p) < 1e-9);
    }
    const Morph still = static_morph(make_icosphere(1), 5);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(infinitesimal_distortion(still, k) == 0.0);
    }
}

TEST_CASE("nonuniform time grids") {
    std::vector<double> times = {0.0};
    for (int i = 1; i < 30; ++i) {
        const double u = i / 30.0;
        times.push_back(u * u);
    }
    times.push_back(1.0);
    const Morph h = minimal_circle_morph(64, times);
    const double p = total_volume(h.source());
    for (std::size_t k = 0; k < h.frame_count(); ++k) {
        CHECK(rel_err(infinitesimal_distortion(h, k), 4.0 * p) < 1e-8);
    }
    CHECK(rel_err(total_distortion(h).phi_total, 4.0 * p) < 1e-8);

    const Morph two = minimal_circle_morph(16, {0.0, 1.0});
    CHECK(infinitesimal_distortion(two, 0) > 0.0);
}

TEST_CASE("total distortion of circle morphs") {
    const Morph fine = minimal_circle_morph(4096, uniform_times(201));
    const DistortionReport rep = total_distortion(fine);
    CHECK(rel_err(rep.phi_total, 8 * pi) < 1e-4);
    CHECK(rel_err(rep.phi_lower_bound, 8 * pi) < 1e-4);
    CHECK(rep.per_time.size() == 201);
    CHECK(rep.per_time.back().t == 1.0);
    for (const auto& s : rep.per_time) {
        CHECK(s.volume > 0.0);
        CHECK(s.max_jac_dev < 1e-12);
    }
    CHECK(rel_err(pairwise_phi_via_volumes(fine), 8 * pi) < 1e-4);

    const DistortionReport still = total_distortion(static_morph(make_regular_polygon(10), 7));
    CHECK(still.phi_total < 1e-24);
    CHECK(pairwise_phi_via_volumes(static_morph(make_regular_polygon(10), 7)) < 1e-24);
}

TEST_CASE("total distortion of the optimal sphere morph") {
    const Morph h = scaled_morph(make_icosphere(2), uniform_times(201), [](double t) { return t + 1; });
    const double a = total_volume(h.source());
    CHECK(rel_err(total_distortion(h).phi_total, 4 * a) < 1e-9);
    for (std::size_t k : {1u, 100u, 199u}) {
        CHECK(rel_err(infinitesimal_distortion(h, k), 4 * a) < 1e-9);
    }
}

TEST_CASE("pairwise minimality") {
    const PairwiseReport scaled = is_pairwise_minimal(scaling_morph(make_icosphere(1), 3.0, 9), 1e-9);
    CHECK(scaled.minimal);
    CHECK(scaled.max_deviation < 1e-12);

    const Morph slosh = sloshing_circle_morph(64, 21, [](double) { return 1.0; },
                                              [](double t) { return 0.5 * std::sin(pi * t); });
    const PairwiseReport rep = is_pairwise_minimal(slosh, 1e-3);
    CHECK_FALSE(rep.minimal);
    CHECK(rep.worst_frame == 10);
    CHECK(error_code_of([&] { pairwise_phi_via_volumes(slosh); }) == ErrorCode::Precondition);
}

TEST_CASE("pairwise minimalization of a sloshing static circle") {
    const Morph slosh = sloshing_circle_morph(64, 41, [](double) { return 1.0; },
                                              [](double t) { return 0.5 * std::sin(pi * t); });
    const double before = total_distortion(slosh).phi_total;
    REQUIRE(before > 1.0);
    const Morph out = pairwise_minimalize(slosh, exact());
    CHECK(is_pairwise_minimal(out, 1e-9).minimal);
    // Each frame inscribes a slightly different polygon in the circle; the
    // remaining distortion is exactly that perimeter wobble.
    const double after = total_distortion(out).phi_total;
    CHECK(after < 1e-3 * before);
    CHECK(rel_err(after, pairwise_phi_via_volumes(out)) < 1e-10);
}

TEST_CASE("pairwise minimalization of an expanding sloshing ellipse") {
    const Morph base = sloshing_circle_morph(64, 101, [](double t) { return 1.0 + t; },
                                             [](double t) { return 0.4 * std::sin(pi * t); });
    std::vector<std::vector<Point>> frames;
    for (std::size_t k = 0; k < base.frame_count(); ++k) {
        std::vector<Point> f;
        const double stretch = 1.0 + base.times()[k];
        for (const auto& p : base.frame(k).vertices()) {
            f.emplace_back(stretch * p.x(), p.y(), 0.0);
        }
        frames.push_back(std::move(f));
    }
    const Morph h(base.source(), {base.times().begin(), base.times().end()}, frames);
    const Morph out = pairwise_minimalize(h, exact());
    const double before = total_distortion(h).phi_total;
    const double after = total_distortion(out).phi_total;
    CHECK(after <= before + 1e-9);
    CHECK(rel_err(after, pairwise_phi_via_volumes(out)) < 1e-10);
    CHECK(after >= total_distortion(out).phi_lower_bound * (1 - 1e-6));

    const Morph fixed = pairwise_minimalize(scaling_morph(make_regular_polygon(20), 2.0, 11), exact());
    const Morph ref = scaling_morph(make_regular_polygon(20), 2.0, 11);
    for (std::size_t k = 0; k < 11; ++k) {
        for (std::size_t i = 0; i < 20; ++i) {
            CHECK((fixed.frame(k).vertex(i) - ref.frame(k).vertex(i)).norm() < 1e-12);
        }
    }
}

TEST_CASE("optimal schedule") {
    const VolumeSchedule c = optimal_schedule(3.0, 3.0);
    for (double t : {0.0, 0.3, 1.0}) {
        CHECK(c.value(t) == doctest::Approx(3.0).epsilon(1e-15));
    }
    CHECK(psi_value(c) == 0.0);

    const VolumeSchedule s = optimal_schedule(4 * pi, 16 * pi);
    for (double t : {0.0, 0.1, 0.5, 0.77, 1.0}) {
        CHECK(rel_err(s.value(t), 4 * pi * (t + 1) * (t + 1)) < 1e-14);
    }
    CHECK(rel_err(s.value(0.5), 9 * pi) < 1e-15);
    CHECK(rel_err(s.value(0.5), 28.274333882308138) < 1e-14);
    CHECK(rel_err(psi_value(s), 16 * pi) < 1e-14);
    CHECK(rel_err(psi_value(s.resampled(401)), 16 * pi) < 1e-4);

    const VolumeSchedule d = optimal_schedule(2 * pi, 8 * pi);
    CHECK(rel_err(d.value(0.25), 2 * pi * 1.5625) < 1e-14);
    CHECK(error_code_of([] { optimal_schedule(-1.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("linear schedule is strictly suboptimal") {
    const std::vector<double> times = uniform_times(4001);
    std::vector<double> values;
    for (double t : times) {
        values.push_back(4 * pi + 12 * pi * t);
    }
    const double psi = psi_value(VolumeSchedule::sampled(times, values));
    // (12 pi)^2 ln 4 / (12 pi).
    CHECK(rel_err(psi, 12 * pi * std::log(4.0)) < 1e-6);
    CHECK(rel_err(psi, 52.262066167) < 1e-6);
    CHECK(psi > 16 * pi);

    CHECK(error_code_of([] { VolumeSchedule::sampled({0.0, 1.0}, {1.0, -1.0}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { VolumeSchedule::sampled({0.0, 0.5}, {1.0, 1.0}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { VolumeSchedule::sampled({0.0, 1.0}, {1.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("scaling morph") {
    const auto circle = make_regular_polygon(64);
    const Morph h = scaling_morph(circle, 4.0, 201);
    const double p = total_volume(circle);
    for (std::size_t k = 0; k < h.frame_count(); ++k) {
        const double t = h.times()[k];
        CHECK(rel_err(h.frame(k).vertex(5).norm(), (t + 1) * (t + 1)) < 1e-13);
    }
    CHECK(rel_err(total_distortion(h).phi_total, 4 * p) < 1e-3);
    CHECK(rel_err(4 * p, 25.122649255) < 1e-9);

    const Morph s = scaling_morph(make_icosphere(2), 2.0, 51);
    for (std::size_t k = 0; k < s.frame_count(); ++k) {
        CHECK(rel_err(s.frame(k).vertex(0).norm(), s.times()[k] + 1) < 1e-13);
    }
    CHECK(total_distortion(scaling_morph(circle, 1.0, 11)).phi_total < 1e-24);
    CHECK(error_code_of([&] { scaling_morph(circle, 0.0, 11); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { scaling_morph(circle, 2.0, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("minimalize reaches the lower bound") {
    SUBCASE("circle morph 2 pi to 8 pi") {
        const Morph h = random_morph(make_regular_polygon(64), 2, 201, 0.4, 4.0);
        const Morph out = minimalize(h, exact());
        const double p = total_volume(h.source());
        CHECK(rel_err(total_distortion(out).phi_total, 4 * p) < 1e-3);
        for (std::size_t i = 0; i < 64; ++i) {
            CHECK((out.frame(200).vertex(i) - h.frame(200).vertex(i)).norm() < 1e-12);
            CHECK((out.frame(0).vertex(i) - h.frame(0).vertex(i)).norm() == 0.0);
        }
    }
    SUBCASE("sloshing expanding square") {
        const Morph h = random_morph(make_unit_square(8), 3, 201, 0.4, 2.5);
        const DistortionReport out = total_distortion(minimalize(h, exact()));
        CHECK(rel_err(out.phi_total, out.phi_lower_bound) < 1e-3);
    }
    SUBCASE("already minimal morph is unchanged") {
        const Morph h = scaling_morph(make_regular_polygon(32), 3.0, 101);
        const Morph out = minimalize(h, exact());
        CHECK(rel_err(total_distortion(out).phi_total, total_distortion(h).phi_total) < 1e-12);
    }
}

TEST_CASE("minimalize beats every seeded morph with the same endpoints") {
    const auto circle = make_regular_polygon(48);
    const double best = total_distortion(minimalize(random_morph(circle, 1, 101, 0.3, 3.0), exact())).phi_total;
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const DistortionReport rep = total_distortion(random_morph(circle, seed, 101, 0.4, 3.0));
        CHECK(best <= rep.phi_total + 1e-3 * best);
        CHECK(rep.phi_total >= rep.phi_lower_bound * (1 - 1e-3));
    }
}

TEST_CASE("pairwise minimalization never increases distortion") {
    const auto circle = make_regular_polygon(40);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Morph h = random_morph(circle, seed, 31, 0.5, 1.0 + 0.1 * static_cast<double>(seed));
        CHECK(total_distortion(pairwise_minimalize(h, exact())).phi_total <= total_distortion(h).phi_total + 1e-9);
    }
}
