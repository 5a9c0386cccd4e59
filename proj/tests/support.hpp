#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <doctest.h>

#include <distmorph/error.hpp>
#include <distmorph/geometry.hpp>
#include <distmorph/morph.hpp>

namespace distmorph::test {

inline constexpr double pi = std::numbers::pi;

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

/// Runs `body` and returns the code of the distmorph::Error it throws.
inline ErrorCode error_code_of(const std::function<void()>& body) {
    try {
        body();
    }
    catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a distmorph::Error");
    return ErrorCode::InvalidArgument;
}

inline std::vector<Point> positions(const DiscreteManifold& m) {
    return {m.vertices().begin(), m.vertices().end()};
}

/// Frames m scaled about the origin by lambda(t).
inline Morph scaled_morph(const DiscreteManifold& m, const std::vector<double>& times,
                          const std::function<double(double)>& lambda) {
    std::vector<std::vector<Point>> frames;
    for (double t : times) {
        std::vector<Point> f;
        for (const auto& p : m.vertices()) {
            f.push_back(lambda(t) * p);
        }
        frames.push_back(std::move(f));
    }
    return Morph(m, times, std::move(frames));
}

/// Frame k is the image loop re-sampled at angles theta_i + slosh(t) sin(theta_i).
inline Morph sloshing_circle_morph(std::size_t count, std::size_t num_frames,
                                   const std::function<double(double)>& radius,
                                   const std::function<double(double)>& slosh) {
    std::vector<double> times;
    std::vector<std::vector<Point>> frames;
    for (std::size_t k = 0; k < num_frames; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(num_frames - 1);
        times.push_back(t);
        std::vector<Point> f;
        for (std::size_t i = 0; i < count; ++i) {
            const double theta = 2 * pi * static_cast<double>(i) / static_cast<double>(count);
            const double a = theta + slosh(t) * std::sin(theta);
            f.emplace_back(radius(t) * std::cos(a), radius(t) * std::sin(a), 0.0);
        }
        frames.push_back(std::move(f));
    }
    times.back() = 1.0;
    return Morph(DiscreteManifold::loop(frames.front()), times, frames);
}

} // namespace distmorph::test
