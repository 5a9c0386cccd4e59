#include <distmorph/moser.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <distmorph/error.hpp>

namespace distmorph {

void MoserSolveOptions::check() const {
    if (!(rel_tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "rel_tol must be positive");
    }
    if (max_iters < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
    }
    if (!(step_scale > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "step_scale must be positive");
    }
}

Point closest_point_on_triangle(const Point& p, const Point& a, const Point& b, const Point& c) {
    // Voronoi-region walk over vertices, edges and the interior.
    const Point ab = b - a;
    const Point ac = c - a;
    const Point ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        return a;
    }
    const Point bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        return a + (d1 / (d1 - d3)) * ab;
    }
    const Point cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        return a + (d2 / (d2 - d6)) * ac;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

// ---------------------------------------------------------------------------
// Curves

namespace {

// Arclength-parametrized closed polyline.
class ArclengthLoop {
public:
    explicit ArclengthLoop(std::span<const Point> points)
        : points_(points.begin(), points.end())
        , cumulative_(points.size() + 1, 0.0) {
        for (std::size_t j = 0; j < points_.size(); ++j) {
            cumulative_[j + 1] = cumulative_[j] + (next(j) - points_[j]).norm();
        }
    }

    double length() const { return cumulative_.back(); }

    std::size_t segment(double s) const {
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
        std::size_t j = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
        return std::min(j, points_.size() - 1);
    }

    Point at(double s) const {
        const std::size_t j = segment(s);
        const double len = cumulative_[j + 1] - cumulative_[j];
        const double u = std::clamp((s - cumulative_[j]) / len, 0.0, 1.0);
        return (1.0 - u) * points_[j] + u * next(j);
    }

    Point tangent(double s) const {
        const std::size_t j = segment(s);
        return (next(j) - points_[j]).normalized();
    }

private:
    const Point& next(std::size_t j) const { return points_[(j + 1) % points_.size()]; }

    std::vector<Point> points_;
    std::vector<double> cumulative_;
};

struct ChordResidual {
    std::vector<Point> points;
    Eigen::VectorXd r;
    double max_relative = 0.0;
};

} // namespace

CorrespondenceMap reparametrize_curve(const CorrespondenceMap& map) {
    const DiscreteManifold& src = map.source();
    if (src.dim() != 1) {
        throw Error(ErrorCode::Precondition, "reparametrize_curve needs a loop source");
    }
    // Validates degeneracy and traversal direction.
    (void)jacobian_field(map);

    const std::size_t n = src.vertex_count();
    const std::vector<double> lengths = simplex_measures(src);
    double source_length = 0.0;
    std::vector<double> sigma(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        source_length += lengths[i];
        sigma[i + 1] = source_length;
    }

    const ArclengthLoop image(map.target_positions());
    const double image_length = image.length();
    for (auto& s : sigma) {
        s = s / source_length * image_length;
    }
    sigma[n] = image_length;

    auto evaluate = [&](const std::vector<double>& sig, double c) {
        ChordResidual out;
        out.points.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.points[i] = image.at(sig[i]);
        }
        out.points[0] = map.target_positions()[0];
        out.r.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const double chord = (out.points[(i + 1) % n] - out.points[i]).norm();
            out.r[static_cast<Eigen::Index>(i)] = chord - c * lengths[i];
            out.max_relative = std::max(out.max_relative, std::abs(out.r[static_cast<Eigen::Index>(i)]) / (c * lengths[i]));
        }
        return out;
    };

    double c = 0.0;
    {
        ChordResidual initial = evaluate(sigma, 1.0);
        double chords = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            chords += initial.r[static_cast<Eigen::Index>(i)] + lengths[i];
        }
        c = chords / source_length;
    }
    ChordResidual current = evaluate(sigma, c);

    constexpr double target = 1e-14;
    constexpr int max_newton = 100;
    for (int iter = 0; iter < max_newton && current.max_relative > target; ++iter) {
        // Unknowns: sigma_1 .. sigma_{n-1}, then c.
        const auto size = static_cast<Eigen::Index>(n);
        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(3 * n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            const Point chord = current.points[j] - current.points[i];
            const Point u = chord.normalized();
            const auto row = static_cast<Eigen::Index>(i);
            if (j != 0) {
                entries.emplace_back(row, static_cast<Eigen::Index>(j - 1), u.dot(image.tangent(sigma[j])));
            }
            if (i != 0) {
                entries.emplace_back(row, static_cast<Eigen::Index>(i - 1), -u.dot(image.tangent(sigma[i])));
            }
            entries.emplace_back(row, size - 1, -lengths[i]);
        }
        Eigen::SparseMatrix<double> jac(size, size);
        jac.setFromTriplets(entries.begin(), entries.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
        solver.compute(jac);
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorCode::ConvergenceFailure, "singular chord-equalization system");
        }
        const Eigen::VectorXd delta = solver.solve(-current.r);

        bool improved = false;
        for (double beta = 1.0; beta > 1e-6; beta *= 0.5) {
            std::vector<double> trial = sigma;
            for (std::size_t i = 1; i < n; ++i) {
                trial[i] += beta * delta[static_cast<Eigen::Index>(i - 1)];
            }
            bool ordered = true;
            for (std::size_t i = 0; i < n && ordered; ++i) {
                ordered = trial[i + 1] > trial[i];
            }
            const double trial_c = c + beta * delta[size - 1];
            if (!ordered || !(trial_c > 0.0)) {
                continue;
            }
            ChordResidual next = evaluate(trial, trial_c);
            if (next.max_relative < current.max_relative) {
                sigma = std::move(trial);
                c = trial_c;
                current = std::move(next);
                improved = true;
                break;
            }
        }
        if (!improved) {
            break;
        }
    }
    if (current.max_relative > 1e-12) {
        std::ostringstream msg;
        msg << "chord equalization stalled at relative residual " << current.max_relative;
        throw Error(ErrorCode::ConvergenceFailure, msg.str());
    }
    return CorrespondenceMap(src, std::move(current.points));
}

// ---------------------------------------------------------------------------
// Surfaces

namespace {

class SurfaceProjector {
public:
    explicit SurfaceProjector(const DiscreteManifold& surface)
        : surface_(surface) {
        const std::size_t m = surface.simplex_count();
        centers_.resize(m);
        radii_.resize(m);
        for (std::size_t f = 0; f < m; ++f) {
            const Face face = surface.simplex(f);
            const Point c = (surface.vertex(face[0]) + surface.vertex(face[1]) + surface.vertex(face[2])) / 3.0;
            double r = 0.0;
            for (std::size_t v : face) {
                r = std::max(r, (surface.vertex(v) - c).norm());
            }
            centers_[f] = c;
            radii_[f] = r;
        }
    }

    /// Brute force over all faces; `hint` seeds the search bound and is
    /// updated to the winning face.
    Point project(const Point& p, std::size_t& hint) const {
        Point best = closest_on(p, hint);
        double best_dist = (best - p).norm();
        for (std::size_t f = 0; f < centers_.size(); ++f) {
            if ((p - centers_[f]).norm() - radii_[f] >= best_dist || f == hint) {
                continue;
            }
            const Point q = closest_on(p, f);
            const double d = (q - p).norm();
            if (d < best_dist) {
                best = q;
                best_dist = d;
                hint = f;
            }
        }
        return best;
    }

private:
    Point closest_on(const Point& p, std::size_t f) const {
        const Face face = surface_.simplex(f);
        return closest_point_on_triangle(p, surface_.vertex(face[0]), surface_.vertex(face[1]),
                                         surface_.vertex(face[2]));
    }

    const DiscreteManifold& surface_;
    std::vector<Point> centers_;
    std::vector<double> radii_;
};

struct SurfaceState {
    std::vector<Point> positions;
    std::vector<double> areas;
    double phi = 0.0;
    double spread = 0.0;
};

double distortion(std::span<const double> areas, std::span<const double> weights) {
    double sum = 0.0;
    for (std::size_t f = 0; f < areas.size(); ++f) {
        const double d = areas[f] / weights[f] - 1.0;
        sum += d * d * weights[f];
    }
    return sum;
}

// sum_f (A_f / w_f - Jbar)^2 w_f with Jbar = sum A / sum w.
double spread(std::span<const double> areas, std::span<const double> weights) {
    double image = 0.0;
    double source = 0.0;
    for (std::size_t f = 0; f < areas.size(); ++f) {
        image += areas[f];
        source += weights[f];
    }
    const double mean = image / source;
    double sum = 0.0;
    for (std::size_t f = 0; f < areas.size(); ++f) {
        const double d = areas[f] / weights[f] - mean;
        sum += d * d * weights[f];
    }
    return sum;
}

double max_relative_deviation(std::span<const double> areas, std::span<const double> weights) {
    double image = 0.0;
    double source = 0.0;
    for (std::size_t f = 0; f < areas.size(); ++f) {
        image += areas[f];
        source += weights[f];
    }
    const double ratio = image / source;
    double dev = 0.0;
    for (std::size_t f = 0; f < areas.size(); ++f) {
        dev = std::max(dev, std::abs(areas[f] / weights[f] - ratio) / ratio);
    }
    return dev;
}

} // namespace

MoserResult relax_surface(const CorrespondenceMap& map, const MoserSolveOptions& opts) {
    opts.check();
    const DiscreteManifold& src = map.source();
    if (src.dim() != 2) {
        throw Error(ErrorCode::Precondition, "relax_surface needs a triangle-mesh source");
    }
    const JacobianField initial_field = jacobian_field(map);
    const std::vector<double>& weights = initial_field.weights;
    const DiscreteManifold& image = map.image();
    const auto faces = src.faces();
    const std::size_t nv = src.vertex_count();
    const auto nf = faces.size();

    MoserReport report;
    SurfaceState state;
    state.positions.assign(image.vertices().begin(), image.vertices().end());
    state.areas.assign(image.raw_measures().begin(), image.raw_measures().end());
    state.phi = distortion(state.areas, weights);
    state.spread = spread(state.areas, weights);
    report.phi_history.push_back(state.phi);
    report.residual = max_relative_deviation(state.areas, weights);
    if (report.residual <= opts.rel_tol) {
        report.converged = true;
        return {map, report};
    }

    const SurfaceProjector projector(image);
    std::vector<std::size_t> hints(nv, 0);
    for (std::size_t f = 0; f < nf; ++f) {
        for (std::size_t v : faces[f]) {
            hints[v] = f;
        }
    }
    std::vector<Point> image_normals(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        image_normals[f] = face_normal(image, f).normalized();
    }
    double total_weight = 0.0;
    for (double w : weights) {
        total_weight += w;
    }
    const double edge = mean_edge_length(image);
    const double min_area = degenerate_relative_threshold * image.mean_measure();

    // Unknowns: two tangent coordinates per vertex in the plane of the image
    // face holding it. Residuals: r_f = sqrt(w_f) (A_f / w_f - Jbar).
    const auto cols = static_cast<Eigen::Index>(2 * nv);
    std::vector<Point> basis(2 * nv);
    std::vector<Point> gradient(nv);
    std::vector<Point> direction(nv);
    std::vector<Point> face_normals(nf);
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    double damping = 1e-3;
    double step = 1.0;

    while (report.iterations < opts.max_iters && report.residual > opts.rel_tol) {
        for (std::size_t v = 0; v < nv; ++v) {
            const Point& nrm = image_normals[hints[v]];
            const Point e1 = nrm.unitOrthogonal();
            basis[2 * v] = e1;
            basis[2 * v + 1] = nrm.cross(e1);
        }
        double mean = 0.0;
        for (std::size_t f = 0; f < nf; ++f) {
            mean += state.areas[f];
        }
        mean /= total_weight;

        entries.clear();
        Eigen::VectorXd r(static_cast<Eigen::Index>(nf));
        std::fill(gradient.begin(), gradient.end(), Point::Zero());
        for (std::size_t f = 0; f < nf; ++f) {
            const Face& t = faces[f];
            const Point& a = state.positions[t[0]];
            const Point& b = state.positions[t[1]];
            const Point& c = state.positions[t[2]];
            const Point cross = (b - a).cross(c - a);
            face_normals[f] = cross;
            const Point unit = cross.normalized();
            const std::array<Point, 3> dA = {0.5 * unit.cross(c - b), 0.5 * unit.cross(a - c), 0.5 * unit.cross(b - a)};
            const double sw = std::sqrt(weights[f]);
            const auto row = static_cast<Eigen::Index>(f);
            r[row] = sw * (state.areas[f] / weights[f] - mean);
            for (int k = 0; k < 3; ++k) {
                const std::size_t v = t[static_cast<std::size_t>(k)];
                gradient[v] += 2.0 * (state.areas[f] / weights[f] - mean) * dA[static_cast<std::size_t>(k)];
                for (std::size_t e = 0; e < 2; ++e) {
                    entries.emplace_back(row, static_cast<Eigen::Index>(2 * v + e),
                                         dA[static_cast<std::size_t>(k)].dot(basis[2 * v + e]) / sw);
                }
            }
        }
        Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(nf), cols);
        jac.setFromTriplets(entries.begin(), entries.end());
        // Minimum-norm Gauss-Newton step: delta = J^T (J J^T + damping D)^-1 r.
        Eigen::SparseMatrix<double> gram = jac * jac.transpose();
        const double scale = gram.diagonal().maxCoeff();
        for (Eigen::Index i = 0; i < gram.rows(); ++i) {
            gram.coeffRef(i, i) += damping * (gram.coeff(i, i) + 1e-6 * scale);
        }
        solver.compute(gram);
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorCode::Stagnation, "singular Gauss-Newton system at residual " + std::to_string(report.residual));
        }
        const Eigen::VectorXd delta = jac.transpose() * solver.solve(r);
        double max_d = 0.0;
        for (std::size_t v = 0; v < nv; ++v) {
            direction[v] = delta[static_cast<Eigen::Index>(2 * v)] * basis[2 * v] +
                           delta[static_cast<Eigen::Index>(2 * v + 1)] * basis[2 * v + 1];
            max_d = std::max(max_d, direction[v].norm());
        }
        if (!(max_d > 0.0) || !std::isfinite(max_d)) {
            throw Error(ErrorCode::Stagnation, "no descent direction at residual " + std::to_string(report.residual));
        }
        step = std::min(step, opts.step_scale * edge / max_d);

        bool accepted = false;
        bool full_step = true;
        SurfaceState trial;
        trial.positions.resize(nv);
        trial.areas.resize(nf);
        std::vector<std::size_t> trial_hints;
        while (!accepted) {
            if (step * max_d < 1e-14 * edge) {
                break;
            }
            trial_hints = hints;
            for (std::size_t v = 0; v < nv; ++v) {
                trial.positions[v] = projector.project(state.positions[v] - step * direction[v], trial_hints[v]);
            }
            bool valid = true;
            for (std::size_t f = 0; f < nf && valid; ++f) {
                const Face& t = faces[f];
                const Point cross = (trial.positions[t[1]] - trial.positions[t[0]])
                                        .cross(trial.positions[t[2]] - trial.positions[t[0]]);
                trial.areas[f] = 0.5 * cross.norm();
                valid = trial.areas[f] > min_area && cross.dot(face_normals[f]) > 0.0;
            }
            if (valid) {
                trial.phi = distortion(trial.areas, weights);
                trial.spread = spread(trial.areas, weights);
                double slope = 0.0;
                for (std::size_t v = 0; v < nv; ++v) {
                    slope += gradient[v].dot(trial.positions[v] - state.positions[v]);
                }
                constexpr double armijo = 1e-4;
                accepted = trial.spread <= state.spread + armijo * std::min(slope, 0.0) &&
                           trial.spread < state.spread && trial.phi <= state.phi;
            }
            if (!accepted) {
                step *= 0.5;
                full_step = false;
            }
        }
        if (!accepted) {
            break;
        }
        state = std::move(trial);
        hints = std::move(trial_hints);
        ++report.iterations;
        report.phi_history.push_back(state.phi);
        report.residual = max_relative_deviation(state.areas, weights);
        if (full_step) {
            damping = std::max(damping / 3.0, 1e-9);
            step = std::min(1.0, 2.0 * step);
        }
        else {
            damping = std::min(damping * 2.0, 1e6);
        }
    }

    report.converged = report.residual <= opts.rel_tol;
    for (std::size_t v = 0; v < nv; ++v) {
        std::size_t hint = hints[v];
        report.max_offset_from_image =
            std::max(report.max_offset_from_image, (projector.project(state.positions[v], hint) - state.positions[v]).norm());
    }
    return {CorrespondenceMap(src, std::move(state.positions)), report};
}

MoserResult make_minimal_map(const CorrespondenceMap& map, const MoserSolveOptions& opts) {
    opts.check();
    if (map.source().dim() == 2) {
        return relax_surface(map, opts);
    }
    MoserReport report;
    report.phi_history.push_back(total_distortion_map(map));
    CorrespondenceMap out = reparametrize_curve(map);
    const JacobianField field = jacobian_field(out);
    report.phi_history.push_back(total_distortion_map(field));
    report.residual = minimality(field).max_deviation;
    report.converged = report.residual <= opts.rel_tol;
    report.iterations = 1;
    return {std::move(out), report};
}

} // namespace distmorph
