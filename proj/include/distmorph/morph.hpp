#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <distmorph/maps.hpp>
#include <distmorph/moser.hpp>

namespace distmorph {

/// Time-sampled family of frames on fixed combinatorics. Frame 0 is the
/// source itself, so frame k is the image of the frame-0 -> frame-k map.
class Morph {
public:
    /// Throws InvalidArgument when times are not strictly increasing from 0
    /// to 1 (naming the offending index), when the frame count or a frame's
    /// vertex count does not match, or when frame 0 differs from the source.
    Morph(const DiscreteManifold& source, std::vector<double> times,
          std::vector<std::vector<Point>> frames);

    const DiscreteManifold& source() const noexcept { return frames_.front(); }
    std::span<const double> times() const noexcept { return times_; }
    std::size_t frame_count() const noexcept { return frames_.size(); }
    const DiscreteManifold& frame(std::size_t k) const { return frames_.at(k); }
    CorrespondenceMap frame_map(std::size_t k) const;
    int dim() const noexcept { return source().dim(); }

private:
    std::vector<double> times_;
    std::vector<DiscreteManifold> frames_;
};

/// Every frame validates and every frame map has positive Jacobians.
/// Throws ValidationFailure naming the frame.
void require_valid(const Morph& morph);

/// Per-frame Jacobians of the frame-0 -> frame-k maps.
std::vector<JacobianField> frame_jacobians(const Morph& morph);

/// Total distortion of the transition map between frames s and t:
/// sum (J_t / J_s - 1)^2 J_s w.
double pairwise_energy(const Morph& morph, std::size_t s_idx, std::size_t t_idx);

/// sum (dJ/dt)^2 / J w at sample t_idx, with second-order finite
/// differences in time.
double infinitesimal_distortion(const Morph& morph, std::size_t t_idx);

struct DistortionReport {
    struct Sample {
        double t = 0.0;
        double volume = 0.0;
        double epsilon = 0.0;
        /// max |J - Vol(M^t)/Vol(M)| / (Vol(M^t)/Vol(M)).
        double max_jac_dev = 0.0;
    };
    std::vector<Sample> per_time;
    double phi_total = 0.0;
    /// 4 (sqrt(v1) - sqrt(v0))^2 with v0, v1 the end-frame volumes.
    double phi_lower_bound = 0.0;
};

/// Trapezoid quadrature of the infinitesimal distortion.
DistortionReport total_distortion(const Morph& morph);

struct PairwiseReport {
    bool minimal = false;
    double max_deviation = 0.0;
    std::size_t worst_frame = 0;
    std::size_t worst_simplex = 0;
};

PairwiseReport is_pairwise_minimal(const Morph& morph, double rel_tol);

/// Replaces every frame map by make_minimal_map of it. Solver errors are
/// rethrown with the frame index attached.
Morph pairwise_minimalize(const Morph& morph, const MoserSolveOptions& opts);

/// Integral of (dVol/dt)^2 / Vol. Only meaningful for pairwise-minimal
/// morphs; throws Precondition when is_pairwise_minimal fails at 1e-2.
double pairwise_phi_via_volumes(const Morph& morph);

/// t -> phi(t), either the closed-form optimal quadratic or piecewise-linear
/// samples.
class VolumeSchedule {
public:
    enum class Kind { ClosedFormQuadratic, Sampled };

    /// [(sqrt(v0) - sqrt(v1)) t - sqrt(v0)]^2, constant when v0 == v1.
    static VolumeSchedule closed_form(double v0, double v1);
    /// Throws InvalidArgument for bad grids or nonpositive samples.
    static VolumeSchedule sampled(std::vector<double> times, std::vector<double> values);

    Kind kind() const noexcept { return kind_; }
    double v0() const noexcept { return v0_; }
    double v1() const noexcept { return v1_; }
    double value(double t) const;

    /// Empty for the closed form.
    std::span<const double> sample_times() const noexcept { return times_; }
    std::span<const double> sample_values() const noexcept { return values_; }

    /// Samples of this schedule on a uniform grid.
    VolumeSchedule resampled(std::size_t nodes) const;

private:
    Kind kind_ = Kind::ClosedFormQuadratic;
    double v0_ = 1.0;
    double v1_ = 1.0;
    std::vector<double> times_;
    std::vector<double> values_;
};

VolumeSchedule optimal_schedule(double v0, double v1);

/// Integral of phi'^2 / phi: exact 4 (sqrt(v1) - sqrt(v0))^2 for the closed
/// form, finite differences and trapezoid for samples.
double psi_value(const VolumeSchedule& schedule);

/// Pairwise-minimalizes, then rescales frame k about the origin by
/// (phi(t_k) / Vol(W^k))^(1/n) so the volumes follow the optimal schedule.
Morph minimalize(const Morph& morph, const MoserSolveOptions& opts);

/// h^t(m) = lambda(t) m with the lambda that makes Vol(M^t) follow the
/// optimal schedule from Vol(M) to alpha^n Vol(M). Uniform time grid.
Morph scaling_morph(const DiscreteManifold& manifold, double alpha, std::size_t num_frames);

std::vector<double> uniform_times(std::size_t num_frames);

} // namespace distmorph
