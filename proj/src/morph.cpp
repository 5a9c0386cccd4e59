#include <distmorph/morph.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <distmorph/error.hpp>

#include "finite_difference.hpp"

namespace distmorph {

namespace {

void check_time_grid(std::span<const double> times, const char* what) {
    if (times.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs at least 2 time samples");
    }
    if (times.front() != 0.0) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " times must start at 0", 0);
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) {
            std::ostringstream msg;
            msg << what << " times are not strictly increasing at index " << k;
            throw Error(ErrorCode::InvalidArgument, msg.str(), k);
        }
    }
    if (times.back() != 1.0) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " times must end at 1", times.size() - 1);
    }
}

void check_index(const Morph& morph, std::size_t k) {
    if (k >= morph.frame_count()) {
        throw Error(ErrorCode::InvalidIndex,
                    "time index " + std::to_string(k) + " out of range", k);
    }
}

} // namespace

Morph::Morph(const DiscreteManifold& source, std::vector<double> times,
             std::vector<std::vector<Point>> frames)
    : times_(std::move(times)) {
    check_time_grid(times_, "morph");
    if (frames.size() != times_.size()) {
        throw Error(ErrorCode::InvalidArgument, "frame count does not match the time samples");
    }
    double scale = 1.0;
    for (const auto& v : source.vertices()) {
        scale = std::max(scale, v.cwiseAbs().maxCoeff());
    }
    for (std::size_t i = 0; i < source.vertex_count(); ++i) {
        if (frames[0].size() != source.vertex_count() ||
            (frames[0][i] - source.vertex(i)).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw Error(ErrorCode::InvalidArgument, "frame 0 must equal the source positions", 0);
        }
    }
    frames_.reserve(frames.size());
    frames_.push_back(source);
    for (std::size_t k = 1; k < frames.size(); ++k) {
        if (frames[k].size() != source.vertex_count()) {
            throw Error(ErrorCode::InvalidArgument,
                        "frame " + std::to_string(k) + " has the wrong vertex count", k);
        }
        frames_.push_back(source.with_positions(std::move(frames[k])));
    }
}

CorrespondenceMap Morph::frame_map(std::size_t k) const {
    const auto v = frame(k).vertices();
    return CorrespondenceMap(source(), std::vector<Point>(v.begin(), v.end()));
}

void require_valid(const Morph& morph) {
    for (std::size_t k = 0; k < morph.frame_count(); ++k) {
        const Diagnostics diag = validate(morph.frame(k));
        if (!diag.ok()) {
            throw Error(ErrorCode::ValidationFailure,
                        "frame " + std::to_string(k) + ":\n" + diag.summary(), k);
        }
        try {
            (void)jacobian_field(morph.frame_map(k));
        }
        catch (const Error& e) {
            throw Error(ErrorCode::ValidationFailure,
                        "frame " + std::to_string(k) + ": " + e.what(), k);
        }
    }
}

std::vector<JacobianField> frame_jacobians(const Morph& morph) {
    std::vector<JacobianField> out;
    out.reserve(morph.frame_count());
    for (std::size_t k = 0; k < morph.frame_count(); ++k) {
        out.push_back(jacobian_field(morph.frame_map(k)));
    }
    return out;
}

double pairwise_energy(const Morph& morph, std::size_t s_idx, std::size_t t_idx) {
    check_index(morph, s_idx);
    check_index(morph, t_idx);
    const JacobianField js = jacobian_field(morph.frame_map(s_idx));
    const JacobianField jt = jacobian_field(morph.frame_map(t_idx));
    double sum = 0.0;
    for (std::size_t i = 0; i < js.values.size(); ++i) {
        const double d = jt.values[i] / js.values[i] - 1.0;
        sum += d * d * js.values[i] * js.weights[i];
    }
    return sum;
}

namespace {

double epsilon_at(std::span<const double> times, std::span<const JacobianField> jac, std::size_t k) {
    const detail::Stencil stencil = detail::derivative_stencil(times, k);
    const JacobianField& here = jac[k];
    double sum = 0.0;
    for (std::size_t i = 0; i < here.values.size(); ++i) {
        const double dj = stencil.apply([&](std::size_t j) { return jac[j].values[i]; });
        sum += dj * dj / here.values[i] * here.weights[i];
    }
    return sum;
}

} // namespace

double infinitesimal_distortion(const Morph& morph, std::size_t t_idx) {
    check_index(morph, t_idx);
    const detail::Stencil stencil = detail::derivative_stencil(morph.times(), t_idx);
    // Only the stencil frames are needed; keep the rest empty.
    std::vector<JacobianField> jac(morph.frame_count());
    for (int i = 0; i < stencil.count; ++i) {
        jac[stencil.index[i]] = jacobian_field(morph.frame_map(stencil.index[i]));
    }
    if (jac[t_idx].values.empty()) {
        jac[t_idx] = jacobian_field(morph.frame_map(t_idx));
    }
    return epsilon_at(morph.times(), jac, t_idx);
}

DistortionReport total_distortion(const Morph& morph) {
    const std::vector<JacobianField> jac = frame_jacobians(morph);
    const auto times = morph.times();
    const double v0 = total_volume(morph.source());

    DistortionReport report;
    std::vector<double> eps(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        DistortionReport::Sample s;
        s.t = times[k];
        s.volume = total_volume(morph.frame(k));
        s.epsilon = epsilon_at(times, jac, k);
        const double ratio = s.volume / v0;
        for (double j : jac[k].values) {
            s.max_jac_dev = std::max(s.max_jac_dev, std::abs(j - ratio) / ratio);
        }
        eps[k] = s.epsilon;
        report.per_time.push_back(s);
    }
    report.phi_total = detail::trapezoid(times, eps);
    const double v1 = report.per_time.back().volume;
    const double d = std::sqrt(v1) - std::sqrt(v0);
    report.phi_lower_bound = 4.0 * d * d;
    return report;
}

PairwiseReport is_pairwise_minimal(const Morph& morph, double rel_tol) {
    PairwiseReport report;
    for (std::size_t k = 0; k < morph.frame_count(); ++k) {
        const MinimalityReport m = minimality(jacobian_field(morph.frame_map(k)));
        if (m.max_deviation > report.max_deviation) {
            report.max_deviation = m.max_deviation;
            report.worst_frame = k;
            report.worst_simplex = m.worst_simplex;
        }
    }
    report.minimal = report.max_deviation <= rel_tol;
    return report;
}

Morph pairwise_minimalize(const Morph& morph, const MoserSolveOptions& opts) {
    opts.check();
    std::vector<std::vector<Point>> frames(morph.frame_count());
    const auto src = morph.source().vertices();
    frames[0].assign(src.begin(), src.end());
    for (std::size_t k = 1; k < morph.frame_count(); ++k) {
        try {
            MoserResult r = make_minimal_map(morph.frame_map(k), opts);
            const auto v = r.map.target_positions();
            frames[k].assign(v.begin(), v.end());
        }
        catch (const Error& e) {
            throw Error(e.code(), "frame " + std::to_string(k) + ": " + e.what(), k);
        }
    }
    return Morph(morph.source(), std::vector<double>(morph.times().begin(), morph.times().end()),
                 std::move(frames));
}

double pairwise_phi_via_volumes(const Morph& morph) {
    const PairwiseReport pw = is_pairwise_minimal(morph, 1e-2);
    if (!pw.minimal) {
        std::ostringstream msg;
        msg << "morph is not pairwise minimal (max deviation " << pw.max_deviation << " at frame "
            << pw.worst_frame << ")";
        throw Error(ErrorCode::Precondition, msg.str(), pw.worst_frame);
    }
    const auto times = morph.times();
    std::vector<double> vol(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        vol[k] = total_volume(morph.frame(k));
    }
    std::vector<double> integrand(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double dv = detail::derivative_stencil(times, k).apply([&](std::size_t j) { return vol[j]; });
        integrand[k] = dv * dv / vol[k];
    }
    return detail::trapezoid(times, integrand);
}

// ---------------------------------------------------------------------------
// Volume schedules

VolumeSchedule VolumeSchedule::closed_form(double v0, double v1) {
    if (!(v0 > 0.0) || !(v1 > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "schedule volumes must be positive");
    }
    VolumeSchedule s;
    s.kind_ = Kind::ClosedFormQuadratic;
    s.v0_ = v0;
    s.v1_ = v1;
    return s;
}

VolumeSchedule VolumeSchedule::sampled(std::vector<double> times, std::vector<double> values) {
    check_time_grid(times, "schedule");
    if (values.size() != times.size()) {
        throw Error(ErrorCode::InvalidArgument, "schedule sample count mismatch");
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > 0.0)) {
            throw Error(ErrorCode::InvalidArgument,
                        "schedule sample " + std::to_string(k) + " is not positive", k);
        }
    }
    VolumeSchedule s;
    s.kind_ = Kind::Sampled;
    s.v0_ = values.front();
    s.v1_ = values.back();
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    return s;
}

double VolumeSchedule::value(double t) const {
    if (kind_ == Kind::ClosedFormQuadratic) {
        if (v0_ == v1_) {
            return v0_;
        }
        const double r0 = std::sqrt(v0_);
        const double root = (r0 - std::sqrt(v1_)) * t - r0;
        return root * root;
    }
    if (t <= times_.front()) {
        return values_.front();
    }
    if (t >= times_.back()) {
        return values_.back();
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double u = (t - times_[k]) / (times_[k + 1] - times_[k]);
    return (1.0 - u) * values_[k] + u * values_[k + 1];
}

VolumeSchedule VolumeSchedule::resampled(std::size_t nodes) const {
    std::vector<double> t = uniform_times(nodes);
    std::vector<double> v(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        v[k] = value(t[k]);
    }
    return sampled(std::move(t), std::move(v));
}

VolumeSchedule optimal_schedule(double v0, double v1) {
    return VolumeSchedule::closed_form(v0, v1);
}

double psi_value(const VolumeSchedule& schedule) {
    if (schedule.kind() == VolumeSchedule::Kind::ClosedFormQuadratic) {
        const double d = std::sqrt(schedule.v1()) - std::sqrt(schedule.v0());
        return 4.0 * d * d;
    }
    const auto t = schedule.sample_times();
    const auto v = schedule.sample_values();
    std::vector<double> integrand(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double dv = detail::derivative_stencil(t, k).apply([&](std::size_t j) { return v[j]; });
        integrand[k] = dv * dv / v[k];
    }
    return detail::trapezoid(t, integrand);
}

// ---------------------------------------------------------------------------
// Constructions

std::vector<double> uniform_times(std::size_t num_frames) {
    if (num_frames < 2) {
        throw Error(ErrorCode::InvalidArgument, "need at least 2 time samples");
    }
    std::vector<double> t(num_frames);
    for (std::size_t k = 0; k < num_frames; ++k) {
        t[k] = static_cast<double>(k) / static_cast<double>(num_frames - 1);
    }
    t.back() = 1.0;
    return t;
}

Morph minimalize(const Morph& morph, const MoserSolveOptions& opts) {
    const Morph pairwise = pairwise_minimalize(morph, opts);
    const std::size_t count = pairwise.frame_count();
    const double n = pairwise.dim();
    const VolumeSchedule schedule =
        optimal_schedule(total_volume(pairwise.frame(0)), total_volume(pairwise.frame(count - 1)));

    std::vector<std::vector<Point>> frames(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto v = pairwise.frame(k).vertices();
        frames[k].assign(v.begin(), v.end());
        if (k == 0 || k + 1 == count) {
            continue;
        }
        const double lambda = std::pow(schedule.value(pairwise.times()[k]) / total_volume(pairwise.frame(k)), 1.0 / n);
        for (auto& p : frames[k]) {
            p *= lambda;
        }
    }
    return Morph(pairwise.source(), std::vector<double>(pairwise.times().begin(), pairwise.times().end()),
                 std::move(frames));
}

Morph scaling_morph(const DiscreteManifold& manifold, double alpha, std::size_t num_frames) {
    if (!(alpha > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    }
    std::vector<double> times = uniform_times(num_frames);
    const double n = manifold.dim();
    const double vm = total_volume(manifold);
    const double vn = std::pow(alpha, n) * vm;
    const double rm = std::sqrt(vm);
    const double rn = std::sqrt(vn);

    std::vector<std::vector<Point>> frames(num_frames);
    const auto src = manifold.vertices();
    for (std::size_t k = 0; k < num_frames; ++k) {
        const double bracket = (rm - rn) * times[k] - rm;
        double lambda = std::pow(vm, -1.0 / n) * std::pow(bracket * bracket, 1.0 / n);
        if (k == 0) {
            lambda = 1.0;
        }
        else if (k + 1 == num_frames) {
            lambda = alpha;
        }
        frames[k].reserve(src.size());
        for (const auto& p : src) {
            frames[k].push_back(lambda * p);
        }
    }
    return Morph(manifold, std::move(times), std::move(frames));
}

} // namespace distmorph
