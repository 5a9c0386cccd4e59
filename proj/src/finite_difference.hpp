#pragma once

// Time-grid stencils shared by the morph functionals. Header-internal to the
// library; the oracle module keeps its own independent stencils.

#include <array>
#include <cstddef>
#include <span>

namespace distmorph::detail {

/// First-derivative weights at sample k: three-point central at interior
/// samples, three-point one-sided at the ends (second order on any grid),
/// and the plain difference quotient when only two samples exist.
struct Stencil {
    std::array<std::size_t, 3> index{};
    std::array<double, 3> weight{};
    int count = 0;

    template<typename F>
    double apply(F&& sample) const {
        double sum = 0.0;
        for (int i = 0; i < count; ++i) {
            sum += weight[i] * sample(index[i]);
        }
        return sum;
    }
};

inline Stencil derivative_stencil(std::span<const double> t, std::size_t k) {
    Stencil s;
    const std::size_t n = t.size();
    if (n == 2) {
        const double h = t[1] - t[0];
        s.count = 2;
        s.index = {0, 1, 0};
        s.weight = {-1.0 / h, 1.0 / h, 0.0};
        return s;
    }
    s.count = 3;
    if (k == 0) {
        const double h0 = t[1] - t[0];
        const double h1 = t[2] - t[1];
        s.index = {0, 1, 2};
        s.weight = {-(2.0 * h0 + h1) / (h0 * (h0 + h1)), (h0 + h1) / (h0 * h1), -h0 / (h1 * (h0 + h1))};
    }
    else if (k == n - 1) {
        const double h0 = t[n - 2] - t[n - 3];
        const double h1 = t[n - 1] - t[n - 2];
        s.index = {n - 3, n - 2, n - 1};
        s.weight = {h1 / (h0 * (h0 + h1)), -(h0 + h1) / (h0 * h1), (2.0 * h1 + h0) / (h1 * (h0 + h1))};
    }
    else {
        const double h0 = t[k] - t[k - 1];
        const double h1 = t[k + 1] - t[k];
        s.index = {k - 1, k, k + 1};
        s.weight = {-h1 / (h0 * (h0 + h1)), (h1 - h0) / (h0 * h1), h0 / (h1 * (h0 + h1))};
    }
    return s;
}

inline double trapezoid(std::span<const double> t, std::span<const double> f) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        sum += 0.5 * (t[k + 1] - t[k]) * (f[k] + f[k + 1]);
    }
    return sum;
}

} // namespace distmorph::detail
