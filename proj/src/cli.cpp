#include <distmorph/cli.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include <distmorph/error.hpp>
#include <distmorph/io.hpp>
#include <distmorph/maps.hpp>
#include <distmorph/morph.hpp>
#include <distmorph/moser.hpp>
#include <distmorph/oracle.hpp>

namespace distmorph::cli {

using io::format_double;

void RunConfig::check() const {
    if (rel_tol && !(*rel_tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "--tol must be positive");
    }
    if (!(grad_tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "grad_tol must be positive");
    }
    if (frames < 2) {
        throw Error(ErrorCode::InvalidArgument, "--frames must be at least 2");
    }
    if (max_iters < 1) {
        throw Error(ErrorCode::InvalidArgument, "--max-iters must be at least 1");
    }
    if (!(step_scale > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "step scale must be positive");
    }
    for (const auto& path : inputs) {
        if (path.empty()) {
            throw Error(ErrorCode::InvalidArgument, "empty input path");
        }
    }
}

std::vector<std::string> subcommands() {
    return {"volume", "jacobian", "map-distortion", "make-minimal-map", "morph-distortion",
            "pairwise-minimalize", "minimalize", "schedule", "scaling-morph", "verify"};
}

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::Stagnation:
    case ErrorCode::ConvergenceFailure:
        return ConvergenceFailed;
    case ErrorCode::Parse:
    case ErrorCode::Io:
        return IoFailed;
    default:
        return ValidationFailed;
    }
}

struct Context {
    const RunConfig& config;
    std::istream& in;
    std::ostream& err;

    void need_inputs(std::size_t n) const {
        if (config.inputs.size() != n) {
            std::ostringstream msg;
            msg << config.subcommand << " expects " << n << " positional argument(s), got "
                << config.inputs.size();
            throw Error(ErrorCode::InvalidArgument, msg.str());
        }
    }

    DiscreteManifold manifold(const std::string& path) const {
        if (path == "-") {
            DiscreteManifold m = io::read_manifold(in, "<stdin>");
            require_valid(m);
            return m;
        }
        return io::load_manifold(path);
    }

    Morph morph(const std::string& path) const {
        if (path == "-") {
            Morph m = io::read_morph(in, "<stdin>");
            require_valid(m);
            return m;
        }
        return io::load_morph(path);
    }

    double number(const std::string& text) const {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &used);
        }
        catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size()) {
            throw Error(ErrorCode::InvalidArgument, "not a number: '" + text + "'");
        }
        return v;
    }

    double tol_for(int dim) const { return config.rel_tol.value_or(dim == 1 ? 1e-9 : 1e-2); }

    MoserSolveOptions moser(int dim) const {
        MoserSolveOptions opts;
        opts.rel_tol = tol_for(dim);
        opts.max_iters = config.max_iters;
        opts.step_scale = config.step_scale;
        return opts;
    }

    CorrespondenceMap map(const std::string& source_path, const std::string& target_path) const {
        const DiscreteManifold source = manifold(source_path);
        const DiscreteManifold target = manifold(target_path);
        if (!source.same_combinatorics(target)) {
            throw Error(ErrorCode::IncompatibleMaps, "source and target files do not share combinatorics");
        }
        const auto v = target.vertices();
        return CorrespondenceMap(source, std::vector<Point>(v.begin(), v.end()));
    }
};

std::string morph_text(const Morph& m) {
    std::ostringstream out;
    io::write_morph(out, m);
    return out.str();
}

std::string cmd_volume(const Context& ctx) {
    ctx.need_inputs(1);
    return format_double(total_volume(ctx.manifold(ctx.config.inputs[0]))) + "\n";
}

std::string cmd_jacobian(const Context& ctx) {
    ctx.need_inputs(2);
    const CorrespondenceMap map = ctx.map(ctx.config.inputs[0], ctx.config.inputs[1]);
    const JacobianField field = jacobian_field(map);
    std::ostringstream out;
    out << "simplex,source_measure,image_measure,jacobian\n";
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        out << i << ',' << format_double(field.weights[i]) << ','
            << format_double(map.image().raw_measures()[i]) << ',' << format_double(field.values[i]) << '\n';
    }
    return out.str();
}

std::string cmd_map_distortion(const Context& ctx) {
    ctx.need_inputs(2);
    const CorrespondenceMap map = ctx.map(ctx.config.inputs[0], ctx.config.inputs[1]);
    const JacobianField field = jacobian_field(map);
    const double phi = total_distortion_map(field);
    const double vm = total_volume(map.source());
    const double vn = total_volume(map.image());
    const double lower = phi_min(vm, vn);
    const MinimalityReport rep = minimality(field);
    std::ostringstream out;
    out << "quantity,value\n"
        << "source_volume," << format_double(vm) << '\n'
        << "image_volume," << format_double(vn) << '\n'
        << "phi," << format_double(phi) << '\n'
        << "phi_min," << format_double(lower) << '\n'
        << "gap," << format_double(phi - lower) << '\n'
        << "max_jac_dev," << format_double(rep.max_deviation) << '\n'
        << "minimal," << (rep.max_deviation <= ctx.tol_for(map.source().dim()) ? 1 : 0) << '\n';
    return out.str();
}

std::string cmd_make_minimal_map(const Context& ctx) {
    ctx.need_inputs(2);
    const CorrespondenceMap map = ctx.map(ctx.config.inputs[0], ctx.config.inputs[1]);
    const MoserResult r = make_minimal_map(map, ctx.moser(map.source().dim()));
    ctx.err << "residual " << format_double(r.report.residual) << " after " << r.report.iterations
            << " iteration(s); phi " << format_double(r.report.phi_history.front()) << " -> "
            << format_double(r.report.phi_history.back()) << '\n';
    if (!r.report.converged) {
        throw Error(ErrorCode::ConvergenceFailure,
                    "residual " + format_double(r.report.residual) + " above tolerance");
    }
    std::ostringstream out;
    io::write_manifold(out, r.map.image());
    return out.str();
}

std::string cmd_morph_distortion(const Context& ctx) {
    ctx.need_inputs(1);
    const DistortionReport rep = total_distortion(ctx.morph(ctx.config.inputs[0]));
    std::ostringstream out;
    out << "t,vol,epsilon,max_jac_dev\n";
    for (const auto& s : rep.per_time) {
        out << format_double(s.t) << ',' << format_double(s.volume) << ',' << format_double(s.epsilon) << ','
            << format_double(s.max_jac_dev) << '\n';
    }
    out << "# phi_total," << format_double(rep.phi_total) << '\n'
        << "# phi_lower_bound," << format_double(rep.phi_lower_bound) << '\n';
    return out.str();
}

std::string cmd_pairwise_minimalize(const Context& ctx) {
    ctx.need_inputs(1);
    const Morph m = ctx.morph(ctx.config.inputs[0]);
    const Morph out = pairwise_minimalize(m, ctx.moser(m.dim()));
    const PairwiseReport rep = is_pairwise_minimal(out, ctx.tol_for(m.dim()));
    if (!rep.minimal) {
        throw Error(ErrorCode::ConvergenceFailure, "frame " + std::to_string(rep.worst_frame) +
                                                       " deviation " + format_double(rep.max_deviation));
    }
    return morph_text(out);
}

std::string cmd_minimalize(const Context& ctx) {
    ctx.need_inputs(1);
    const Morph m = ctx.morph(ctx.config.inputs[0]);
    const Morph out = minimalize(m, ctx.moser(m.dim()));
    const DistortionReport rep = total_distortion(out);
    ctx.err << "phi_total " << format_double(rep.phi_total) << ", lower bound "
            << format_double(rep.phi_lower_bound) << '\n';
    return morph_text(out);
}

std::string cmd_schedule(const Context& ctx) {
    ctx.need_inputs(2);
    const VolumeSchedule s = optimal_schedule(ctx.number(ctx.config.inputs[0]), ctx.number(ctx.config.inputs[1]));
    std::ostringstream out;
    out << "t,phi\n";
    for (double t : uniform_times(ctx.config.frames)) {
        out << format_double(t) << ',' << format_double(s.value(t)) << '\n';
    }
    out << "# psi," << format_double(psi_value(s)) << '\n';
    return out.str();
}

std::string cmd_scaling_morph(const Context& ctx) {
    ctx.need_inputs(2);
    const DiscreteManifold m = ctx.manifold(ctx.config.inputs[0]);
    return morph_text(scaling_morph(m, ctx.number(ctx.config.inputs[1]), ctx.config.frames));
}

// ---------------------------------------------------------------------------
// verify

class Suite {
public:
    explicit Suite(std::ostream& out) : out_(out) {}

    void check(const std::string& name, const std::function<std::string()>& body) {
        std::string failure;
        try {
            failure = body();
        }
        catch (const std::exception& e) {
            failure = std::string("exception: ") + e.what();
        }
        if (failure.empty()) {
            out_ << "PASS " << name << '\n';
        }
        else {
            ++failures_;
            out_ << "FAIL " << name << ": " << failure << '\n';
        }
    }

    int failures() const { return failures_; }

private:
    std::ostream& out_;
    int failures_ = 0;
};

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

std::string expect_close(double got, double want, double tol, const char* what) {
    const double r = rel_diff(got, want);
    if (r <= tol) {
        return {};
    }
    std::ostringstream msg;
    msg << what << " " << format_double(got) << " vs " << format_double(want) << " (rel " << r << ")";
    return msg.str();
}

std::vector<Point> transformed(const DiscreteManifold& m, const Eigen::Matrix3d& a, const Point& shift) {
    std::vector<Point> out;
    for (const auto& p : m.vertices()) {
        out.push_back(a * p + shift);
    }
    return out;
}

void verify_manifold(Suite& suite, const std::string& label, const DiscreteManifold& m, const RunConfig& config) {
    const int dim = m.dim();
    const double vm = total_volume(m);
    suite.check(label + " validates", [&] {
        const Diagnostics d = validate(m);
        return d.ok() ? std::string() : d.summary();
    });
    suite.check(label + " volume invariant under rigid motion", [&] {
        const Eigen::Matrix3d rot = dim == 1 ? Eigen::AngleAxisd(0.7, Point::UnitZ()).toRotationMatrix()
                                             : Eigen::AngleAxisd(0.7, Point(1, 2, 3).normalized()).toRotationMatrix();
        const Point shift = dim == 1 ? Point(3, -2, 0) : Point(3, -2, 5);
        return expect_close(total_volume(m.with_positions(transformed(m, rot, shift))), vm, 1e-12, "volume");
    });
    suite.check(label + " volume scales by alpha^n", [&] {
        const double alpha = 1.7;
        const Point center = dim == 1 ? Point(0.3, -0.2, 0) : Point(0.3, -0.2, 0.1);
        std::vector<Point> pts;
        for (const auto& p : m.vertices()) {
            pts.push_back(center + alpha * (p - center));
        }
        return expect_close(total_volume(m.with_positions(pts)), std::pow(alpha, dim) * vm, 1e-12, "volume");
    });

    const double tol = config.rel_tol.value_or(dim == 1 ? 1e-9 : 1e-2);
    std::vector<CorrespondenceMap> maps;
    for (std::uint64_t k = 0; k < 5; ++k) {
        const CorrespondenceMap g = random_map(m, config.seed + k, 0.3);
        const auto t = g.target_positions();
        std::vector<Point> scaled;
        for (const auto& p : t) {
            scaled.push_back((1.0 + 0.2 * static_cast<double>(k)) * p);
        }
        maps.emplace_back(m, std::move(scaled));
    }
    suite.check(label + " change of variables", [&] {
        for (const auto& g : maps) {
            if (auto f = expect_close(jacobian_field(g).integral(), total_volume(g.image()), 1e-12, "sum J w");
                !f.empty()) {
                return f;
            }
        }
        return std::string();
    });
    suite.check(label + " distortion expansion identity", [&] {
        for (const auto& g : maps) {
            const JacobianField field = jacobian_field(g);
            double sq = 0.0;
            for (std::size_t i = 0; i < field.values.size(); ++i) {
                sq += field.values[i] * field.values[i] * field.weights[i];
            }
            const double expanded = sq - 2.0 * total_volume(g.image()) + vm;
            if (auto f = expect_close(total_distortion_map(field), expanded, 1e-10, "phi"); !f.empty()) {
                return f;
            }
        }
        return std::string();
    });
    suite.check(label + " Cauchy-Schwarz lower bound", [&] {
        for (const auto& g : maps) {
            const double phi = total_distortion_map(g);
            const double lower = phi_min(vm, total_volume(g.image()));
            if (phi < lower - 1e-9) {
                return "phi " + format_double(phi) + " below " + format_double(lower);
            }
        }
        return std::string();
    });
    suite.check(label + " minimal maps compose and invert", [&] {
        const CorrespondenceMap f = CorrespondenceMap::scaling(m, 2.0);
        const CorrespondenceMap g = CorrespondenceMap::scaling(f.image(), 0.75);
        if (!is_minimal_map(compose(f, g), 1e-9).minimal || !is_minimal_map(invert(f), 1e-9).minimal) {
            return std::string("composition or inverse not minimal");
        }
        return std::string();
    });
    if (dim == 1) {
        suite.check(label + " minimal map reaches phi_min", [&] {
            MoserSolveOptions opts;
            opts.rel_tol = tol;
            const MoserResult r = make_minimal_map(maps.back(), opts);
            const double phi = total_distortion_map(r.map);
            if (!r.report.converged) {
                return "residual " + format_double(r.report.residual);
            }
            return expect_close(phi, phi_min(vm, total_volume(r.map.image())), 1e-9, "phi");
        });
    }
    suite.check(label + " scaling morph reaches the morph lower bound", [&] {
        const DistortionReport rep = total_distortion(scaling_morph(m, 2.0, config.frames));
        return expect_close(rep.phi_total, rep.phi_lower_bound, 1e-3, "phi_total");
    });
}

void verify_morph(Suite& suite, const std::string& label, const Morph& m) {
    suite.check(label + " distortion above the lower bound", [&] {
        const DistortionReport rep = total_distortion(m);
        if (rep.phi_total < rep.phi_lower_bound * (1.0 - 1e-3)) {
            return "phi_total " + format_double(rep.phi_total) + " below " + format_double(rep.phi_lower_bound);
        }
        return std::string();
    });
}

std::string cmd_verify(const Context& ctx, int& failures) {
    std::ostringstream out;
    Suite suite(out);
    const RunConfig& config = ctx.config;

    suite.check("optimal schedule value", [&] {
        return expect_close(psi_value(optimal_schedule(4 * std::numbers::pi, 16 * std::numbers::pi)),
                            16 * std::numbers::pi, 1e-12, "psi");
    });
    suite.check("brute-force minimizer matches the optimal schedule", [&] {
        VariationalProblem problem;
        problem.v0 = 4 * std::numbers::pi;
        problem.v1 = 16 * std::numbers::pi;
        problem.grad_tol = config.grad_tol;
        const PsiMinResult r = brute_force_psi_min(problem);
        if (!r.converged) {
            return "stopped at gradient " + format_double(r.grad_norm);
        }
        return expect_close(r.value, 16 * std::numbers::pi, 1e-4, "value");
    });
    suite.check("optimal schedule is stationary", [&] {
        const double r = euler_lagrange_residual(optimal_schedule(4 * std::numbers::pi, 16 * std::numbers::pi));
        return r < 1e-8 * 16 * std::numbers::pi * std::numbers::pi ? std::string() : "residual " + format_double(r);
    });

    if (config.inputs.empty()) {
        verify_manifold(suite, "square", make_unit_square(4), config);
        verify_manifold(suite, "64-gon", make_regular_polygon(64), config);
        verify_manifold(suite, "tetrahedron", make_tetrahedron(1.0), config);
        verify_manifold(suite, "icosphere", make_icosphere(2), config);
    }
    for (const auto& path : config.inputs) {
        std::ifstream probe(path);
        char first = 0;
        probe >> first;
        if (first == '{') {
            const Morph m = ctx.morph(path);
            suite.check(path + " validates", [&] { require_valid(m); return std::string(); });
            verify_morph(suite, path, m);
        }
        else {
            verify_manifold(suite, path, io::load_manifold(path), config);
        }
    }
    failures = suite.failures();
    out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << '\n';
    return out.str();
}

} // namespace

int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    try {
        config.check();
        const Context ctx{config, in, err};
        std::string result;
        int status = Success;
        const std::string& cmd = config.subcommand;
        if (cmd == "volume") {
            result = cmd_volume(ctx);
        }
        else if (cmd == "jacobian") {
            result = cmd_jacobian(ctx);
        }
        else if (cmd == "map-distortion") {
            result = cmd_map_distortion(ctx);
        }
        else if (cmd == "make-minimal-map") {
            result = cmd_make_minimal_map(ctx);
        }
        else if (cmd == "morph-distortion") {
            result = cmd_morph_distortion(ctx);
        }
        else if (cmd == "pairwise-minimalize") {
            result = cmd_pairwise_minimalize(ctx);
        }
        else if (cmd == "minimalize") {
            result = cmd_minimalize(ctx);
        }
        else if (cmd == "schedule") {
            result = cmd_schedule(ctx);
        }
        else if (cmd == "scaling-morph") {
            result = cmd_scaling_morph(ctx);
        }
        else if (cmd == "verify") {
            int failures = 0;
            result = cmd_verify(ctx, failures);
            status = failures == 0 ? Success : ValidationFailed;
        }
        else {
            throw Error(ErrorCode::InvalidArgument, "unknown subcommand '" + cmd + "'");
        }

        if (config.output.empty()) {
            out << result;
        }
        else {
            io::write_file_atomically(config.output, result);
        }
        return status;
    }
    catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return IoFailed;
    }
}

} // namespace distmorph::cli
