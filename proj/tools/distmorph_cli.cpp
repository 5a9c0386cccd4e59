#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include <distmorph/cli.hpp>

int main(int argc, char** argv) {
    using namespace distmorph::cli;

    CLI::App app{"Distortion-minimal maps and morphs between closed curves and surfaces"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig config;
    double tol = 0.0;
    app.add_option("--tol", tol, "relative minimality tolerance");
    app.add_option("--frames", config.frames, "number of time samples")->capture_default_str();
    app.add_option("--grad-tol", config.grad_tol, "stopping gradient of the brute-force minimizer")
        ->capture_default_str();
    app.add_option("--seed", config.seed, "seed for generated fixtures")->capture_default_str();
    app.add_option("--max-iters", config.max_iters, "surface solver iteration cap")->capture_default_str();
    app.add_option("-o,--out", config.output, "output file; standard output when omitted");

    const std::map<std::string, std::string> descriptions{
        {"volume", "total measure of a loop or mesh"},
        {"jacobian", "per-simplex Jacobians of the map SOURCE -> IMAGE"},
        {"map-distortion", "distortion of SOURCE -> IMAGE against its lower bound"},
        {"make-minimal-map", "relax IMAGE into a minimal map from SOURCE"},
        {"morph-distortion", "per-frame and total distortion of a morph file"},
        {"pairwise-minimalize", "make every frame of a morph minimal from the first"},
        {"minimalize", "pairwise-minimalize, then retime with the optimal schedule"},
        {"schedule", "optimal distortion schedule between volumes V0 and V1"},
        {"scaling-morph", "uniform scaling morph from SOURCE to scale LAMBDA"},
        {"verify", "self-checks on built-in fixtures or the given files"},
    };
    for (const auto& name : subcommands()) {
        auto* sub = app.add_subcommand(name, descriptions.at(name));
        sub->add_option("inputs", config.inputs, "files ('-' for standard input) or numbers");
        sub->callback([&config, name] { config.subcommand = name; });
    }

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Success : ValidationFailed;
    }
    if (app.count("--tol") > 0) {
        config.rel_tol = tol;
    }
    return run(config, std::cin, std::cout, std::cerr);
}
