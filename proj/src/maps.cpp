#include <distmorph/maps.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Geometry>

#include <distmorph/error.hpp>

namespace distmorph {

namespace {

Eigen::Matrix3d best_fit_rotation(std::span<const Point> from, std::span<const Point> to) {
    Eigen::Matrix3Xd a(3, from.size());
    Eigen::Matrix3Xd b(3, to.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        a.col(i) = from[i];
        b.col(i) = to[i];
    }
    const Eigen::Matrix4d t = Eigen::umeyama(a, b, false);
    return t.topLeftCorner<3, 3>();
}

double geometry_scale(const DiscreteManifold& m) {
    double scale = 0.0;
    for (const auto& v : m.vertices()) {
        scale = std::max(scale, v.cwiseAbs().maxCoeff());
    }
    return std::max(scale, 1.0);
}

} // namespace

CorrespondenceMap::CorrespondenceMap(DiscreteManifold source, std::vector<Point> target_positions)
    : source_(std::move(source))
    , image_(source_.with_positions(std::move(target_positions))) {
}

CorrespondenceMap CorrespondenceMap::identity(const DiscreteManifold& manifold) {
    const auto v = manifold.vertices();
    return CorrespondenceMap(manifold, std::vector<Point>(v.begin(), v.end()));
}

CorrespondenceMap CorrespondenceMap::scaling(const DiscreteManifold& manifold, double alpha) {
    if (!(alpha > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "scaling factor must be positive");
    }
    std::vector<Point> target;
    target.reserve(manifold.vertex_count());
    for (const auto& v : manifold.vertices()) {
        target.push_back(alpha * v);
    }
    return CorrespondenceMap(manifold, std::move(target));
}

double JacobianField::integral() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i] * weights[i];
    }
    return sum;
}

JacobianField jacobian_field(const CorrespondenceMap& map) {
    const DiscreteManifold& src = map.source();
    const DiscreteManifold& img = map.image();

    JacobianField field;
    field.weights = simplex_measures(src);
    field.values.resize(field.weights.size());

    const auto image_measures = img.raw_measures();
    const double threshold = degenerate_relative_threshold * img.mean_measure();
    for (std::size_t i = 0; i < image_measures.size(); ++i) {
        if (!(image_measures[i] > threshold)) {
            throw Error(ErrorCode::DegenerateImage,
                        "image of simplex " + std::to_string(i) + " has zero measure", i);
        }
        field.values[i] = image_measures[i] / field.weights[i];
    }

    const double src_signed = signed_enclosed_volume(src);
    const double img_signed = signed_enclosed_volume(img);
    if (src_signed * img_signed < 0.0) {
        throw Error(ErrorCode::OrientationReversal,
                    src.dim() == 1 ? "image loop is traversed in reverse"
                                   : "image surface has reversed global orientation");
    }

    if (src.dim() == 2) {
        const Eigen::Matrix3d rotation = best_fit_rotation(src.vertices(), img.vertices());
        for (std::size_t f = 0; f < src.simplex_count(); ++f) {
            const Point expected = rotation * face_normal(src, f);
            if (expected.dot(face_normal(img, f)) < 0.0) {
                throw Error(ErrorCode::OrientationReversal,
                            "image of face " + std::to_string(f) + " is flipped", f);
            }
        }
    }
    return field;
}

double total_distortion_map(const JacobianField& field) {
    double sum = 0.0;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const double d = field.values[i] - 1.0;
        sum += d * d * field.weights[i];
    }
    return sum;
}

double total_distortion_map(const CorrespondenceMap& map) {
    return total_distortion_map(jacobian_field(map));
}

double phi_min(double vol_m, double vol_n) {
    if (!(vol_m > 0.0) || !(vol_n > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "volumes must be positive");
    }
    const double d = vol_m - vol_n;
    return d * d / vol_m;
}

MinimalityReport minimality(const JacobianField& field) {
    MinimalityReport report;
    double source_volume = 0.0;
    for (double w : field.weights) {
        source_volume += w;
    }
    report.ratio = field.integral() / source_volume;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const double dev = std::abs(field.values[i] - report.ratio) / report.ratio;
        if (dev > report.max_deviation) {
            report.max_deviation = dev;
            report.worst_simplex = i;
        }
    }
    return report;
}

MinimalityReport is_minimal_map(const CorrespondenceMap& map, double rel_tol) {
    if (!(rel_tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "rel_tol must be positive");
    }
    MinimalityReport report = minimality(jacobian_field(map));
    report.minimal = report.max_deviation <= rel_tol;
    return report;
}

CorrespondenceMap compose(const CorrespondenceMap& f, const CorrespondenceMap& g) {
    const DiscreteManifold& mid = f.image();
    const DiscreteManifold& gs = g.source();
    if (!mid.same_combinatorics(gs)) {
        throw Error(ErrorCode::IncompatibleMaps, "combinatorics of f's image and g's source differ");
    }
    const double tol = 1e-12 * geometry_scale(mid);
    for (std::size_t i = 0; i < mid.vertex_count(); ++i) {
        if ((mid.vertex(i) - gs.vertex(i)).cwiseAbs().maxCoeff() > tol) {
            std::ostringstream msg;
            msg << "vertex " << i << " of f's image does not coincide with g's source";
            throw Error(ErrorCode::IncompatibleMaps, msg.str(), i);
        }
    }
    const auto t = g.target_positions();
    return CorrespondenceMap(f.source(), std::vector<Point>(t.begin(), t.end()));
}

CorrespondenceMap invert(const CorrespondenceMap& f) {
    const auto v = f.source().vertices();
    return CorrespondenceMap(f.image(), std::vector<Point>(v.begin(), v.end()));
}

} // namespace distmorph
