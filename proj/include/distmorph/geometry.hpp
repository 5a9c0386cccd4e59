#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

namespace distmorph {

/// Ambient point. Planar loops (n = 1) keep z = 0.
using Point = Eigen::Vector3d;
using Face = std::array<std::size_t, 3>;

/// Measures below this fraction of the mean simplex measure count as zero.
inline constexpr double degenerate_relative_threshold = 1e-12;

/// A closed oriented piecewise-linear hypersurface: a planar polyline loop
/// (dim 1) or a triangle mesh in 3-space (dim 2).
///
/// Loops use the implicit edges (i, i+1 mod count). Meshes carry an explicit
/// face list; the face list is shared between manifolds created through
/// `with_positions`, which is how maps and morph frames share combinatorics.
///
/// Construction only rejects structurally unusable input (too few vertices,
/// out-of-range face indices). The geometric invariants are checked by
/// `validate`, which reports rather than throws.
class DiscreteManifold {
public:
    static DiscreteManifold loop(std::vector<Point> vertices);
    static DiscreteManifold loop(std::span<const Eigen::Vector2d> vertices);
    static DiscreteManifold mesh(std::vector<Point> vertices, std::vector<Face> faces);

    int dim() const noexcept { return dim_; }
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t simplex_count() const noexcept { return measures_.size(); }

    std::span<const Point> vertices() const noexcept { return vertices_; }
    const Point& vertex(std::size_t i) const { return vertices_[i]; }

    /// Empty for loops.
    std::span<const Face> faces() const noexcept;

    /// Vertex ids of simplex `i`; the third entry is unused for loops.
    Face simplex(std::size_t i) const;

    /// Unchecked Euclidean measures (edge lengths or triangle areas).
    std::span<const double> raw_measures() const noexcept { return measures_; }
    double mean_measure() const noexcept { return mean_measure_; }

    /// Same combinatorics, new vertex positions.
    DiscreteManifold with_positions(std::vector<Point> vertices) const;

    bool same_combinatorics(const DiscreteManifold& other) const;

private:
    DiscreteManifold(int dim, std::vector<Point> vertices,
                     std::shared_ptr<const std::vector<Face>> faces);

    int dim_ = 1;
    std::vector<Point> vertices_;
    std::shared_ptr<const std::vector<Face>> faces_;
    std::vector<double> measures_;
    double mean_measure_ = 0.0;
};

/// Edge length (dim 1) or triangle area (dim 2). Throws InvalidIndex or
/// DegenerateSimplex.
double simplex_measure(const DiscreteManifold& manifold, std::size_t index);

/// All simplex measures; throws DegenerateSimplex on the first zero measure.
std::vector<double> simplex_measures(const DiscreteManifold& manifold);

double total_volume(const DiscreteManifold& manifold);

/// Unnormalized orientation normal of a triangle, (b - a) x (c - a).
Point face_normal(const DiscreteManifold& manifold, std::size_t face);

/// Signed enclosed area (dim 1, counterclockwise positive) or signed
/// enclosed volume (dim 2, outward normals positive).
double signed_enclosed_volume(const DiscreteManifold& manifold);

/// Area-weighted vertex normals (dim 2) or edge-length weighted outward
/// normals in the plane (dim 1), normalized. Orientation follows the
/// combinatorial orientation.
std::vector<Point> vertex_normals(const DiscreteManifold& manifold);

double mean_edge_length(const DiscreteManifold& manifold);

struct Diagnostics {
    struct Check {
        std::string name;
        bool passed = true;
        std::string message;
        std::vector<std::size_t> ids;
        std::vector<std::pair<std::size_t, std::size_t>> edges;
    };

    std::vector<Check> checks;

    bool ok() const;
    const Check* find(const std::string& name) const;
    std::string summary() const;
};

/// Checks "closed", "oriented", "non-degenerate" and "connected".
Diagnostics validate(const DiscreteManifold& manifold);

/// Throws ValidationFailure carrying the diagnostics summary if any check fails.
void require_valid(const DiscreteManifold& manifold);

// Fixtures.
DiscreteManifold make_regular_polygon(std::size_t count, double radius = 1.0);
/// Axis-aligned unit square starting at the origin, counterclockwise, with
/// `points_per_side` vertices on each side (corners included once).
DiscreteManifold make_unit_square(std::size_t points_per_side = 1);
DiscreteManifold make_tetrahedron(double edge = 1.0);
/// Subdivided icosahedron projected to the sphere; 10 * 4^k + 2 vertices.
DiscreteManifold make_icosphere(int subdivisions, double radius = 1.0);

} // namespace distmorph
