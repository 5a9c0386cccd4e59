#pragma once

#include <cstddef>
#include <vector>

#include <distmorph/maps.hpp>

namespace distmorph {

struct MoserSolveOptions {
    /// Target max relative Jacobian deviation.
    double rel_tol = 1e-2;
    /// Iteration cap for the surface backend.
    int max_iters = 500;
    /// Largest displacement of any vertex in one surface step, in mean edge
    /// lengths.
    double step_scale = 0.25;

    /// Throws InvalidArgument when a field is out of range.
    void check() const;
};

struct MoserReport {
    bool converged = false;
    /// Max relative Jacobian deviation of the returned map.
    double residual = 0.0;
    int iterations = 0;
    /// Total distortion after every accepted step, starting with the input.
    std::vector<double> phi_history;
    /// Largest distance of a returned image vertex from the input image.
    double max_offset_from_image = 0.0;
};

struct MoserResult {
    CorrespondenceMap map;
    MoserReport report;
};

/// Exact reparametrization of a loop map. Vertex i, at source arclength
/// fraction s_i / L_M, is first sent to the point at the same arclength
/// fraction of the image loop. When the image has corners between the new
/// points the chords fall short of the arcs, so the positions are then
/// corrected by a Newton solve along the image polyline until every chord
/// ratio is the same constant. All returned vertices lie on the input image
/// polyline and image vertex 0 is kept fixed.
///
/// Throws Precondition for meshes, DegenerateSimplex / DegenerateImage for
/// zero-length edges and ConvergenceFailure if the correction stalls.
CorrespondenceMap reparametrize_curve(const CorrespondenceMap& map);

/// Projected descent over the image vertex positions. Each vertex moves in
/// the plane of the input image face holding it and is snapped back to the
/// input image surface by closest-point query. The direction is a damped
/// Gauss-Newton step for the Jacobian spread sum_f (J_f - Jbar)^2 w_f, whose
/// gradient is the tangential gradient of the total distortion with the
/// image volume held fixed. A step is accepted when the spread satisfies the
/// Armijo condition, the total distortion does not increase and no face flips
/// or degenerates; otherwise the step is halved.
///
/// Stops at `opts.rel_tol`, after `opts.max_iters` accepted steps, or when
/// the line search underflows, and reports the residual in every case.
/// Throws Stagnation only when no finite descent direction exists.
MoserResult relax_surface(const CorrespondenceMap& map, const MoserSolveOptions& opts);

/// Dispatches on the dimension: reparametrize_curve for loops, relax_surface
/// for meshes.
MoserResult make_minimal_map(const CorrespondenceMap& map, const MoserSolveOptions& opts);

/// Closest point to `p` on triangle (a, b, c).
Point closest_point_on_triangle(const Point& p, const Point& a, const Point& b, const Point& c);

} // namespace distmorph
