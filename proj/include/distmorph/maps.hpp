#pragma once

#include <cstddef>
#include <vector>

#include <distmorph/geometry.hpp>

namespace distmorph {

/// Discrete stand-in for a diffeomorphism: the source manifold plus the image
/// of every source vertex. The image manifold shares the source combinatorics
/// and each simplex is mapped affinely.
class CorrespondenceMap {
public:
    CorrespondenceMap(DiscreteManifold source, std::vector<Point> target_positions);

    static CorrespondenceMap identity(const DiscreteManifold& manifold);
    /// x -> alpha * x.
    static CorrespondenceMap scaling(const DiscreteManifold& manifold, double alpha);

    const DiscreteManifold& source() const noexcept { return source_; }
    const DiscreteManifold& image() const noexcept { return image_; }
    std::span<const Point> target_positions() const noexcept { return image_.vertices(); }

private:
    DiscreteManifold source_;
    DiscreteManifold image_;
};

/// Per-simplex Jacobian (image measure over source measure) together with the
/// source measures used to integrate against the source volume form.
struct JacobianField {
    std::vector<double> values;
    std::vector<double> weights;

    /// Sum of values * weights, which is the image volume.
    double integral() const;
};

/// Throws DegenerateImage, DegenerateSimplex (source) or OrientationReversal.
///
/// Orientation is checked per simplex for meshes by comparing each image
/// normal with the source normal after removing the best-fit rotation
/// between the vertex sets, and globally for both dimensions by the sign of
/// the enclosed volume.
JacobianField jacobian_field(const CorrespondenceMap& map);

/// Sum over simplices of (J - 1)^2 times the source measure.
double total_distortion_map(const CorrespondenceMap& map);
double total_distortion_map(const JacobianField& field);

/// (vol_m - vol_n)^2 / vol_m, the least total distortion of any map between
/// manifolds of these volumes. Throws InvalidArgument on nonpositive volumes.
double phi_min(double vol_m, double vol_n);

struct MinimalityReport {
    bool minimal = false;
    /// max |J - ratio| / ratio over simplices.
    double max_deviation = 0.0;
    std::size_t worst_simplex = 0;
    /// image volume / source volume.
    double ratio = 1.0;
};

MinimalityReport minimality(const JacobianField& field);
MinimalityReport is_minimal_map(const CorrespondenceMap& map, double rel_tol);

/// Returns g o f. Requires g.source() to coincide with f.image() (same
/// combinatorics, vertex positions within 1e-12 of the geometry scale).
CorrespondenceMap compose(const CorrespondenceMap& f, const CorrespondenceMap& g);

/// Swaps source and image.
CorrespondenceMap invert(const CorrespondenceMap& f);

} // namespace distmorph
