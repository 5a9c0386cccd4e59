#include <distmorph/geometry.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include <distmorph/error.hpp>

namespace distmorph {

DiscreteManifold make_regular_polygon(std::size_t count, double radius) {
    if (count < 3 || !(radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "regular polygon needs count >= 3 and radius > 0");
    }
    std::vector<Point> vertices(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / count;
        vertices[i] = Point(radius * std::cos(theta), radius * std::sin(theta), 0.0);
    }
    return DiscreteManifold::loop(std::move(vertices));
}

DiscreteManifold make_unit_square(std::size_t points_per_side) {
    if (points_per_side < 1) {
        throw Error(ErrorCode::InvalidArgument, "points_per_side must be >= 1");
    }
    const std::array<Point, 4> corners = {Point(0, 0, 0), Point(1, 0, 0), Point(1, 1, 0), Point(0, 1, 0)};
    std::vector<Point> vertices;
    for (int side = 0; side < 4; ++side) {
        const Point& a = corners[side];
        const Point& b = corners[(side + 1) % 4];
        for (std::size_t k = 0; k < points_per_side; ++k) {
            const double s = static_cast<double>(k) / points_per_side;
            vertices.push_back((1.0 - s) * a + s * b);
        }
    }
    return DiscreteManifold::loop(std::move(vertices));
}

DiscreteManifold make_tetrahedron(double edge) {
    const double s = edge / (2.0 * std::sqrt(2.0));
    std::vector<Point> v = {Point(s, s, s), Point(s, -s, -s), Point(-s, s, -s), Point(-s, -s, s)};
    std::vector<Face> faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    auto mesh = DiscreteManifold::mesh(v, faces);
    if (signed_enclosed_volume(mesh) < 0.0) {
        for (auto& f : faces) {
            std::swap(f[1], f[2]);
        }
        mesh = DiscreteManifold::mesh(std::move(v), std::move(faces));
    }
    return mesh;
}

DiscreteManifold make_icosphere(int subdivisions, double radius) {
    if (subdivisions < 0 || !(radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "icosphere needs subdivisions >= 0 and radius > 0");
    }
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Point> v = {
        Point(-1, t, 0), Point(1, t, 0), Point(-1, -t, 0), Point(1, -t, 0),
        Point(0, -1, t), Point(0, 1, t), Point(0, -1, -t), Point(0, 1, -t),
        Point(t, 0, -1), Point(t, 0, 1), Point(-t, 0, -1), Point(-t, 0, 1),
    };
    for (auto& p : v) {
        p.normalize();
    }
    std::vector<Face> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };

    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoints;
        auto midpoint = [&](std::size_t a, std::size_t b) {
            const auto key = a < b ? std::pair{a, b} : std::pair{b, a};
            auto it = midpoints.find(key);
            if (it != midpoints.end()) {
                return it->second;
            }
            v.push_back((v[a] + v[b]).normalized());
            midpoints.emplace(key, v.size() - 1);
            return v.size() - 1;
        };
        std::vector<Face> next;
        next.reserve(4 * faces.size());
        for (const Face& f : faces) {
            const std::size_t ab = midpoint(f[0], f[1]);
            const std::size_t bc = midpoint(f[1], f[2]);
            const std::size_t ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    for (auto& p : v) {
        p *= radius;
    }
    return DiscreteManifold::mesh(std::move(v), std::move(faces));
}

} // namespace distmorph
