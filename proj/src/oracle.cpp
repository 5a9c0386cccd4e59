#include <distmorph/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include <distmorph/error.hpp>

namespace distmorph {

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Auxiliary functional

void VariationalProblem::check() const {
    if (!(v0 > 0.0) || !(v1 > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "boundary volumes must be positive");
    }
    if (num_nodes < 3) {
        throw Error(ErrorCode::InvalidArgument, "need at least 3 nodes");
    }
    if (max_iters < 1 || !(grad_tol > 0.0) || !(step > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "descent controls must be positive");
    }
}

namespace {

double discrete_psi(std::span<const double> phi, double h) {
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < phi.size(); ++j) {
        const double d = (phi[j + 1] - phi[j]) / h;
        sum += h * d * d * 0.5 * (1.0 / phi[j] + 1.0 / phi[j + 1]);
    }
    return sum;
}

// Gradient with respect to every node; the end entries are ignored.
void discrete_psi_gradient(std::span<const double> phi, double h, std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t j = 0; j + 1 < phi.size(); ++j) {
        const double diff = phi[j + 1] - phi[j];
        const double mean_inv = 0.5 * (1.0 / phi[j] + 1.0 / phi[j + 1]);
        const double sq = diff * diff / h;
        grad[j] += -2.0 * diff / h * mean_inv - sq * 0.5 / (phi[j] * phi[j]);
        grad[j + 1] += 2.0 * diff / h * mean_inv - sq * 0.5 / (phi[j + 1] * phi[j + 1]);
    }
}

} // namespace

PsiMinResult brute_force_psi_min(const VariationalProblem& problem) {
    problem.check();
    const std::size_t n = problem.num_nodes;
    const double h = 1.0 / static_cast<double>(n - 1);
    const double floor = 1e-8 * std::min(problem.v0, problem.v1);

    std::vector<double> phi(n);
    std::vector<double> times(n);
    for (std::size_t j = 0; j < n; ++j) {
        times[j] = static_cast<double>(j) * h;
        phi[j] = problem.v0 + (problem.v1 - problem.v0) * times[j];
    }
    times.back() = 1.0;
    phi.back() = problem.v1;

    std::vector<double> grad(n);
    std::vector<double> trial(n);
    double value = discrete_psi(phi, h);
    double step = problem.step;
    PsiMinResult result;

    for (int iter = 0; iter < problem.max_iters; ++iter) {
        discrete_psi_gradient(phi, h, grad);
        grad.front() = 0.0;
        grad.back() = 0.0;
        double gmax = 0.0;
        double gsq = 0.0;
        for (double g : grad) {
            gmax = std::max(gmax, std::abs(g) / h);
            gsq += g * g;
        }
        result.grad_norm = gmax;
        result.iterations = iter;
        if (gmax < problem.grad_tol) {
            result.converged = true;
            break;
        }

        bool accepted = false;
        while (step > 1e-30) {
            for (std::size_t j = 0; j < n; ++j) {
                trial[j] = std::max(phi[j] - step * grad[j], floor);
            }
            trial.front() = problem.v0;
            trial.back() = problem.v1;
            double slope = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                slope += grad[j] * (trial[j] - phi[j]);
            }
            const double tv = discrete_psi(trial, h);
            if (tv <= value + 1e-4 * slope && tv < value) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        phi.swap(trial);
        value = discrete_psi(phi, h);
        step *= 2.0;
    }
    result.value = value;
    result.schedule = VolumeSchedule::sampled(std::move(times), std::move(phi));
    return result;
}

double euler_lagrange_residual(const VolumeSchedule& schedule) {
    const VolumeSchedule sampled =
        schedule.kind() == VolumeSchedule::Kind::Sampled ? schedule : schedule.resampled(101);
    const auto t = sampled.sample_times();
    const auto f = sampled.sample_values();
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        const double h0 = t[k] - t[k - 1];
        const double h1 = t[k + 1] - t[k];
        const double d1 = (-h1 / (h0 * (h0 + h1))) * f[k - 1] + ((h1 - h0) / (h0 * h1)) * f[k] +
                          (h0 / (h1 * (h0 + h1))) * f[k + 1];
        const double d2 = 2.0 * (f[k - 1] / (h0 * (h0 + h1)) - f[k] / (h0 * h1) + f[k + 1] / (h1 * (h0 + h1)));
        worst = std::max(worst, std::abs(2.0 * f[k] * d2 - d1 * d1));
    }
    return worst;
}

std::vector<TaylorRow> taylor_check(const Morph& morph, std::size_t t_idx, std::span<const double> offsets) {
    const auto times = morph.times();
    if (t_idx >= times.size()) {
        throw Error(ErrorCode::InvalidIndex, "time index out of range", t_idx);
    }
    const double t = times[t_idx];
    std::vector<TaylorRow> rows;
    for (double offset : offsets) {
        const double s = t + offset;
        if (offset == 0.0 || s < -1e-9 || s > 1.0 + 1e-9) {
            std::ostringstream msg;
            msg << "offset " << offset << " leaves [0, 1] or is zero";
            throw Error(ErrorCode::InvalidArgument, msg.str());
        }
        auto it = std::min_element(times.begin(), times.end(),
                                   [s](double a, double b) { return std::abs(a - s) < std::abs(b - s); });
        if (std::abs(*it - s) > 1e-9) {
            std::ostringstream msg;
            msg << "no sample at t = " << s;
            throw Error(ErrorCode::InvalidArgument, msg.str());
        }
        TaylorRow row;
        row.offset = offset;
        row.s_idx = static_cast<std::size_t>(it - times.begin());
        const double ds = times[row.s_idx] - t;
        row.ratio = pairwise_energy(morph, row.s_idx, t_idx) / (ds * ds);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Geometry helpers (independent of the solver's closest-point code)

namespace {

Point closest_on_segment(const Point& p, const Point& a, const Point& b) {
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    const double u = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return a + u * ab;
}

// Plane projection with barycentric test, falling back to the edges.
Point closest_on_triangle(const Point& p, const Point& a, const Point& b, const Point& c) {
    const Point n = (b - a).cross(c - a);
    const double n2 = n.squaredNorm();
    if (n2 > 0.0) {
        const Point q = p - ((p - a).dot(n) / n2) * n;
        const double wa = (c - b).cross(q - b).dot(n);
        const double wb = (a - c).cross(q - c).dot(n);
        const double wc = (b - a).cross(q - a).dot(n);
        if (wa >= 0.0 && wb >= 0.0 && wc >= 0.0) {
            return q;
        }
    }
    Point best = closest_on_segment(p, a, b);
    for (const Point& cand : {closest_on_segment(p, b, c), closest_on_segment(p, c, a)}) {
        if ((cand - p).squaredNorm() < (best - p).squaredNorm()) {
            best = cand;
        }
    }
    return best;
}

Point closest_on_manifold(const Point& p, const DiscreteManifold& m) {
    Point best = m.vertex(0);
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.simplex_count(); ++i) {
        const Face s = m.simplex(i);
        const Point q = m.dim() == 1 ? closest_on_segment(p, m.vertex(s[0]), m.vertex(s[1]))
                                     : closest_on_triangle(p, m.vertex(s[0]), m.vertex(s[1]), m.vertex(s[2]));
        const double d = (q - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = q;
        }
    }
    return best;
}

std::vector<Point> sample_points(const DiscreteManifold& m) {
    std::vector<Point> pts(m.vertices().begin(), m.vertices().end());
    for (std::size_t i = 0; i < m.simplex_count(); ++i) {
        const Face s = m.simplex(i);
        if (m.dim() == 1) {
            pts.push_back(0.5 * (m.vertex(s[0]) + m.vertex(s[1])));
            continue;
        }
        for (int k = 0; k < 3; ++k) {
            pts.push_back(0.5 * (m.vertex(s[k]) + m.vertex(s[(k + 1) % 3])));
        }
        pts.push_back((m.vertex(s[0]) + m.vertex(s[1]) + m.vertex(s[2])) / 3.0);
    }
    return pts;
}

// Position at arclength s along the loop (wrapping).
Point loop_point(const DiscreteManifold& m, std::span<const double> cumulative, double s) {
    const double length = cumulative.back();
    s = std::fmod(s, length);
    if (s < 0.0) {
        s += length;
    }
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    std::size_t j = static_cast<std::size_t>(it - cumulative.begin()) - 1;
    j = std::min(j, m.vertex_count() - 1);
    const double u = (s - cumulative[j]) / (cumulative[j + 1] - cumulative[j]);
    return (1.0 - u) * m.vertex(j) + u * m.vertex((j + 1) % m.vertex_count());
}

std::vector<double> loop_cumulative(const DiscreteManifold& m) {
    std::vector<double> c(m.vertex_count() + 1, 0.0);
    for (std::size_t i = 0; i < m.vertex_count(); ++i) {
        c[i + 1] = c[i] + m.raw_measures()[i];
    }
    return c;
}

// Per-vertex tangent offsets for meshes, per-vertex signed slide lengths for
// loops (stored in x).
std::vector<Point> draw_offsets(const DiscreteManifold& m, SplitMix64& rng, double magnitude) {
    const double edge = mean_edge_length(m);
    std::vector<Point> out(m.vertex_count(), Point::Zero());
    if (m.dim() == 1) {
        for (auto& o : out) {
            o.x() = magnitude * edge * rng.symmetric();
        }
        return out;
    }
    const std::vector<Point> normals = vertex_normals(m);
    for (std::size_t v = 0; v < out.size(); ++v) {
        const Point& nrm = normals[v];
        const Point helper = std::abs(nrm.x()) < 0.9 ? Point::UnitX() : Point::UnitY();
        const Point e1 = nrm.cross(helper).normalized();
        const Point e2 = nrm.cross(e1);
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        const double radius = magnitude * edge * rng.uniform();
        out[v] = radius * (std::cos(angle) * e1 + std::sin(angle) * e2);
    }
    return out;
}

std::vector<Point> displaced(const DiscreteManifold& m, std::span<const Point> offsets, double weight,
                             std::span<const double> cumulative) {
    std::vector<Point> pts(m.vertex_count());
    for (std::size_t v = 0; v < pts.size(); ++v) {
        if (weight == 0.0) {
            pts[v] = m.vertex(v);
        }
        else if (m.dim() == 1) {
            pts[v] = loop_point(m, cumulative, cumulative[v] + weight * offsets[v].x());
        }
        else {
            pts[v] = closest_on_manifold(m.vertex(v) + weight * offsets[v], m);
        }
    }
    return pts;
}

bool acceptable(const CorrespondenceMap& map) {
    if (!validate(map.image()).ok()) {
        return false;
    }
    try {
        (void)jacobian_field(map);
    }
    catch (const Error&) {
        return false;
    }
    return true;
}

constexpr int max_attempts = 100;

} // namespace

double distance_to_manifold(const Point& p, const DiscreteManifold& m) {
    return (closest_on_manifold(p, m) - p).norm();
}

double hausdorff_distance(const DiscreteManifold& a, const DiscreteManifold& b) {
    double worst = 0.0;
    for (const Point& p : sample_points(a)) {
        worst = std::max(worst, distance_to_manifold(p, b));
    }
    for (const Point& p : sample_points(b)) {
        worst = std::max(worst, distance_to_manifold(p, a));
    }
    return worst;
}

CorrespondenceMap random_map(const DiscreteManifold& manifold, std::uint64_t seed, double magnitude) {
    if (!(magnitude >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "magnitude must be nonnegative");
    }
    SplitMix64 rng(seed);
    const std::vector<double> cumulative = manifold.dim() == 1 ? loop_cumulative(manifold) : std::vector<double>{};
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const std::vector<Point> offsets = draw_offsets(manifold, rng, magnitude);
        CorrespondenceMap map(manifold, displaced(manifold, offsets, 1.0, cumulative));
        if (manifold.dim() == 1) {
            // Slides must keep the cyclic vertex order.
            bool ordered = true;
            const std::size_t n = manifold.vertex_count();
            for (std::size_t i = 0; i < n && ordered; ++i) {
                const double a = cumulative[i] + offsets[i].x();
                const double b = cumulative[i + 1] + offsets[(i + 1) % n].x();
                ordered = b > a;
            }
            if (!ordered) {
                continue;
            }
        }
        if (acceptable(map)) {
            return map;
        }
    }
    throw Error(ErrorCode::GenerationFailure, "no valid random map in 100 attempts");
}

Morph random_morph(const DiscreteManifold& manifold, std::uint64_t seed, std::size_t num_frames,
                   double magnitude, double scale_end) {
    if (!(magnitude >= 0.0) || !(scale_end > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "magnitude must be nonnegative and scale_end positive");
    }
    const std::vector<double> times = uniform_times(num_frames);
    SplitMix64 rng(seed);
    const std::vector<double> cumulative = manifold.dim() == 1 ? loop_cumulative(manifold) : std::vector<double>{};
    const std::size_t n = manifold.vertex_count();

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const std::vector<Point> offsets = draw_offsets(manifold, rng, magnitude);
        if (manifold.dim() == 1) {
            bool ordered = true;
            for (std::size_t i = 0; i < n && ordered; ++i) {
                ordered = cumulative[i + 1] + offsets[(i + 1) % n].x() > cumulative[i] + offsets[i].x();
            }
            if (!ordered) {
                continue;
            }
        }
        std::vector<std::vector<Point>> frames(num_frames);
        bool ok = true;
        for (std::size_t k = 0; k < num_frames && ok; ++k) {
            const double t = times[k];
            const double slide = (k == 0 || k + 1 == num_frames) ? 0.0 : std::sin(std::numbers::pi * t);
            const double scale = k == 0 ? 1.0 : (k + 1 == num_frames ? scale_end : 1.0 + (scale_end - 1.0) * t);
            frames[k] = displaced(manifold, offsets, slide, cumulative);
            for (auto& p : frames[k]) {
                p *= scale;
            }
            if (k > 0) {
                ok = acceptable(CorrespondenceMap(manifold, frames[k]));
            }
        }
        if (ok) {
            return Morph(manifold, times, std::move(frames));
        }
    }
    throw Error(ErrorCode::GenerationFailure, "no valid random morph in 100 attempts");
}

CorrespondenceMap swirl_map(const DiscreteManifold& manifold, std::uint64_t seed, double magnitude, double scale) {
    SplitMix64 rng(seed);
    Point axis;
    do {
        axis = Point(rng.symmetric(), rng.symmetric(), rng.symmetric());
    } while (axis.norm() < 0.1 || axis.norm() > 1.0);
    axis.normalize();
    std::vector<Point> target;
    target.reserve(manifold.vertex_count());
    for (const auto& p : manifold.vertices()) {
        const double r = p.norm();
        const double c = r > 0.0 ? axis.dot(p) / r : 0.0;
        const double angle = magnitude * (1.0 - c * c);
        target.push_back(scale * (Eigen::AngleAxisd(angle, axis) * p));
    }
    return CorrespondenceMap(manifold, std::move(target));
}

} // namespace distmorph
