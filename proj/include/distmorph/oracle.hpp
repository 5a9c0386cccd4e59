#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <distmorph/maps.hpp>
#include <distmorph/morph.hpp>

namespace distmorph {

/// splitmix64 (Steele, Lea, Flood 2014): state += 0x9e3779b97f4a7c15, then
/// the two xor-shift-multiply rounds with 0xbf58476d1ce4e5b9 and
/// 0x94d049bb133111eb. Doubles take the top 53 bits.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [-1, 1).
    double symmetric() { return 2.0 * uniform() - 1.0; }

private:
    std::uint64_t state_;
};

struct VariationalProblem {
    double v0 = 1.0;
    double v1 = 1.0;
    /// Grid nodes including both fixed endpoints.
    std::size_t num_nodes = 101;
    int max_iters = 2000000;
    /// Bound on the max-norm of the nodal gradient divided by the grid step.
    double grad_tol = 1e-4;
    /// First trial step of the backtracking search.
    double step = 1e-3;

    void check() const;
};

struct PsiMinResult {
    VolumeSchedule schedule;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
};

/// Gradient descent with backtracking over the nodal values of a
/// piecewise-linear phi with fixed ends, minimizing the trapezoid
/// discretization sum_j h d_j^2 (1/phi_j + 1/phi_{j+1}) / 2 with
/// d_j = (phi_{j+1} - phi_j) / h. Nodes are clamped at 1e-8 min(v0, v1).
/// Starts from linear interpolation. A run that stops above grad_tol is
/// returned with converged = false and the last iterate.
PsiMinResult brute_force_psi_min(const VariationalProblem& problem);

/// max over interior nodes of |2 phi phi'' - phi'^2| with three-point
/// stencils. Closed-form schedules are sampled on 101 uniform nodes.
double euler_lagrange_residual(const VolumeSchedule& schedule);

struct TaylorRow {
    double offset = 0.0;
    std::size_t s_idx = 0;
    /// E_{s,t} / (s - t)^2.
    double ratio = 0.0;
};

/// Offsets are signed; t + offset must land on a sample time (within 1e-9)
/// inside [0, 1], otherwise InvalidArgument.
std::vector<TaylorRow> taylor_check(const Morph& morph, std::size_t t_idx, std::span<const double> offsets);

/// Tangential random perturbation of the identity: loop vertices slide along
/// the loop by up to magnitude * mean edge length; mesh vertices move in
/// their tangent plane by up to magnitude * mean edge length and are snapped
/// back to the surface. Invalid draws are resampled up to 100 times, then
/// GenerationFailure.
CorrespondenceMap random_map(const DiscreteManifold& manifold, std::uint64_t seed, double magnitude);

/// Frames slide vertices tangentially with amplitude magnitude * sin(pi t)
/// (per-vertex random direction and size) and scale the result by
/// 1 + (scale_end - 1) t. Uniform time grid. Both end frames are exact
/// similarity images of the source.
Morph random_morph(const DiscreteManifold& manifold, std::uint64_t seed, std::size_t num_frames,
                   double magnitude, double scale_end = 1.0);

/// x -> R(x) scale * x where R rotates about a seeded axis through the origin
/// by magnitude * (1 - (axis . x / |x|)^2). Keeps |x| and so keeps vertices
/// of a sphere on the sphere.
CorrespondenceMap swirl_map(const DiscreteManifold& manifold, std::uint64_t seed, double magnitude,
                            double scale = 1.0);

/// Symmetric Hausdorff distance estimated from vertices, edge midpoints and
/// face centroids of each side against the exact surface of the other.
double hausdorff_distance(const DiscreteManifold& a, const DiscreteManifold& b);

/// Distance from p to the image polyline / surface of `m`.
double distance_to_manifold(const Point& p, const DiscreteManifold& m);

} // namespace distmorph
