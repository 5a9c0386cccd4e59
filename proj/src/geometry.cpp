#include <distmorph/geometry.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Geometry>

#include <distmorph/error.hpp>

namespace distmorph {

namespace {

double triangle_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

std::pair<std::size_t, std::size_t> undirected(std::size_t a, std::size_t b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

// Minimal union-find for the connectivity check.
struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

} // namespace

DiscreteManifold::DiscreteManifold(int dim, std::vector<Point> vertices,
                                   std::shared_ptr<const std::vector<Face>> faces)
    : dim_(dim)
    , vertices_(std::move(vertices))
    , faces_(std::move(faces)) {

    const std::size_t n = dim_ == 1 ? vertices_.size() : faces_->size();
    measures_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Face s = simplex(i);
        if (dim_ == 1) {
            measures_[i] = (vertices_[s[1]] - vertices_[s[0]]).norm();
        }
        else {
            measures_[i] = triangle_area(vertices_[s[0]], vertices_[s[1]], vertices_[s[2]]);
        }
    }
    mean_measure_ = n > 0 ? std::accumulate(measures_.begin(), measures_.end(), 0.0) / n : 0.0;
}

DiscreteManifold DiscreteManifold::loop(std::vector<Point> vertices) {
    if (vertices.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "a loop needs at least 2 vertices");
    }
    for (auto& v : vertices) {
        v.z() = 0.0;
    }
    return DiscreteManifold(1, std::move(vertices), std::make_shared<const std::vector<Face>>());
}

DiscreteManifold DiscreteManifold::loop(std::span<const Eigen::Vector2d> vertices) {
    std::vector<Point> points;
    points.reserve(vertices.size());
    for (const auto& v : vertices) {
        points.emplace_back(v.x(), v.y(), 0.0);
    }
    return loop(std::move(points));
}

DiscreteManifold DiscreteManifold::mesh(std::vector<Point> vertices, std::vector<Face> faces) {
    if (vertices.size() < 3 || faces.empty()) {
        throw Error(ErrorCode::InvalidArgument, "a mesh needs at least 3 vertices and 1 face");
    }
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (std::size_t v : faces[f]) {
            if (v >= vertices.size()) {
                std::ostringstream msg;
                msg << "face " << f << " references vertex " << v << " of " << vertices.size();
                throw Error(ErrorCode::InvalidIndex, msg.str(), f);
            }
        }
    }
    return DiscreteManifold(2, std::move(vertices),
                            std::make_shared<const std::vector<Face>>(std::move(faces)));
}

std::span<const Face> DiscreteManifold::faces() const noexcept {
    return *faces_;
}

Face DiscreteManifold::simplex(std::size_t i) const {
    if (dim_ == 1) {
        return {i, (i + 1) % vertices_.size(), 0};
    }
    return (*faces_)[i];
}

DiscreteManifold DiscreteManifold::with_positions(std::vector<Point> vertices) const {
    if (vertices.size() != vertices_.size()) {
        throw Error(ErrorCode::IncompatibleMaps, "vertex count differs from the shared combinatorics");
    }
    if (dim_ == 1) {
        for (auto& v : vertices) {
            v.z() = 0.0;
        }
    }
    return DiscreteManifold(dim_, std::move(vertices), faces_);
}

bool DiscreteManifold::same_combinatorics(const DiscreteManifold& other) const {
    if (dim_ != other.dim_ || vertices_.size() != other.vertices_.size()) {
        return false;
    }
    return faces_ == other.faces_ || *faces_ == *other.faces_;
}

double simplex_measure(const DiscreteManifold& manifold, std::size_t index) {
    if (index >= manifold.simplex_count()) {
        std::ostringstream msg;
        msg << "simplex " << index << " out of range (" << manifold.simplex_count() << " simplices)";
        throw Error(ErrorCode::InvalidIndex, msg.str(), index);
    }
    const double m = manifold.raw_measures()[index];
    if (!(m > degenerate_relative_threshold * manifold.mean_measure())) {
        throw Error(ErrorCode::DegenerateSimplex,
                    "simplex " + std::to_string(index) + " has zero measure", index);
    }
    return m;
}

std::vector<double> simplex_measures(const DiscreteManifold& manifold) {
    std::vector<double> out(manifold.simplex_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = simplex_measure(manifold, i);
    }
    return out;
}

double total_volume(const DiscreteManifold& manifold) {
    const auto m = manifold.raw_measures();
    return std::accumulate(m.begin(), m.end(), 0.0);
}

Point face_normal(const DiscreteManifold& manifold, std::size_t face) {
    const Face f = manifold.simplex(face);
    const auto& a = manifold.vertex(f[0]);
    return (manifold.vertex(f[1]) - a).cross(manifold.vertex(f[2]) - a);
}

double signed_enclosed_volume(const DiscreteManifold& manifold) {
    double sum = 0.0;
    if (manifold.dim() == 1) {
        const std::size_t n = manifold.vertex_count();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = manifold.vertex(i);
            const auto& q = manifold.vertex((i + 1) % n);
            sum += p.x() * q.y() - q.x() * p.y();
        }
        return 0.5 * sum;
    }
    for (const Face& f : manifold.faces()) {
        sum += manifold.vertex(f[0]).dot(manifold.vertex(f[1]).cross(manifold.vertex(f[2])));
    }
    return sum / 6.0;
}

std::vector<Point> vertex_normals(const DiscreteManifold& manifold) {
    std::vector<Point> normals(manifold.vertex_count(), Point::Zero());
    if (manifold.dim() == 1) {
        const double sign = signed_enclosed_volume(manifold) >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < manifold.simplex_count(); ++i) {
            const Face s = manifold.simplex(i);
            const Point e = manifold.vertex(s[1]) - manifold.vertex(s[0]);
            const Point n = sign * Point(e.y(), -e.x(), 0.0);
            normals[s[0]] += n;
            normals[s[1]] += n;
        }
    }
    else {
        for (std::size_t f = 0; f < manifold.simplex_count(); ++f) {
            // |cross| is twice the area, so this is area weighting.
            const Point n = face_normal(manifold, f);
            for (std::size_t v : manifold.simplex(f)) {
                normals[v] += n;
            }
        }
    }
    for (auto& n : normals) {
        const double len = n.norm();
        if (len > 0.0) {
            n /= len;
        }
    }
    return normals;
}

double mean_edge_length(const DiscreteManifold& manifold) {
    if (manifold.dim() == 1) {
        return manifold.mean_measure();
    }
    double sum = 0.0;
    for (const Face& f : manifold.faces()) {
        for (int k = 0; k < 3; ++k) {
            sum += (manifold.vertex(f[(k + 1) % 3]) - manifold.vertex(f[k])).norm();
        }
    }
    return sum / (3.0 * manifold.simplex_count());
}

bool Diagnostics::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Diagnostics::Check* Diagnostics::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

std::string Diagnostics::summary() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << c.name << ": " << (c.passed ? "ok" : "FAILED");
        if (!c.message.empty()) {
            out << " (" << c.message << ")";
        }
        if (!c.ids.empty()) {
            out << " ids:";
            for (std::size_t i = 0; i < std::min<std::size_t>(c.ids.size(), 16); ++i) {
                out << ' ' << c.ids[i];
            }
            if (c.ids.size() > 16) {
                out << " ...";
            }
        }
        if (!c.edges.empty()) {
            out << " edges:";
            for (std::size_t i = 0; i < std::min<std::size_t>(c.edges.size(), 16); ++i) {
                out << " (" << c.edges[i].first << ',' << c.edges[i].second << ')';
            }
            if (c.edges.size() > 16) {
                out << " ...";
            }
        }
        out << '\n';
    }
    return out.str();
}

Diagnostics validate(const DiscreteManifold& manifold) {
    Diagnostics diag;
    Diagnostics::Check closed{"closed", true, {}, {}, {}};
    Diagnostics::Check oriented{"oriented", true, {}, {}, {}};
    Diagnostics::Check nondegenerate{"non-degenerate", true, {}, {}, {}};
    Diagnostics::Check connected{"connected", true, {}, {}, {}};

    const auto measures = manifold.raw_measures();
    const double threshold = degenerate_relative_threshold * manifold.mean_measure();
    for (std::size_t i = 0; i < measures.size(); ++i) {
        const Face s = manifold.simplex(i);
        const bool repeated = manifold.dim() == 2 && (s[0] == s[1] || s[1] == s[2] || s[0] == s[2]);
        if (repeated || !(measures[i] > threshold)) {
            nondegenerate.ids.push_back(i);
        }
    }
    if (!nondegenerate.ids.empty()) {
        nondegenerate.passed = false;
        nondegenerate.message = "degenerate simplex";
    }

    if (manifold.dim() == 2) {
        std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> edge_faces;
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> directed;
        const auto faces = manifold.faces();
        for (std::size_t f = 0; f < faces.size(); ++f) {
            for (int k = 0; k < 3; ++k) {
                const std::size_t a = faces[f][k];
                const std::size_t b = faces[f][(k + 1) % 3];
                edge_faces[undirected(a, b)].push_back(f);
                ++directed[{a, b}];
            }
        }

        DisjointSets sets(faces.size());
        for (const auto& [edge, incident] : edge_faces) {
            if (incident.size() != 2) {
                closed.edges.push_back(edge);
            }
            for (std::size_t k = 1; k < incident.size(); ++k) {
                sets.unite(incident[0], incident[k]);
            }
        }
        if (!closed.edges.empty()) {
            closed.passed = false;
            closed.message = "not closed: edges not shared by exactly 2 faces";
        }

        for (std::size_t f = 0; f < faces.size(); ++f) {
            for (int k = 0; k < 3; ++k) {
                if (directed[{faces[f][k], faces[f][(k + 1) % 3]}] > 1) {
                    oriented.ids.push_back(f);
                    break;
                }
            }
        }
        if (!oriented.ids.empty()) {
            oriented.passed = false;
            oriented.message = "adjacent faces traverse a shared edge in the same direction";
        }

        std::vector<bool> referenced(manifold.vertex_count(), false);
        for (const Face& f : faces) {
            for (std::size_t v : f) {
                referenced[v] = true;
            }
        }
        std::size_t components = 0;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (sets.find(f) == f) {
                ++components;
            }
        }
        for (std::size_t v = 0; v < referenced.size(); ++v) {
            if (!referenced[v]) {
                connected.ids.push_back(v);
            }
        }
        if (components != 1 || !connected.ids.empty()) {
            connected.passed = false;
            std::ostringstream msg;
            msg << components << " face component(s), " << connected.ids.size()
                << " unreferenced vertex id(s)";
            connected.message = msg.str();
        }
    }

    diag.checks = {closed, oriented, nondegenerate, connected};
    return diag;
}

void require_valid(const DiscreteManifold& manifold) {
    const Diagnostics diag = validate(manifold);
    if (!diag.ok()) {
        throw Error(ErrorCode::ValidationFailure, diag.summary());
    }
}

} // namespace distmorph
