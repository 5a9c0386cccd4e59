#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace distmorph::cli {

/// Process exit codes.
enum ExitCode : int {
    Success = 0,
    ValidationFailed = 1,
    ConvergenceFailed = 2,
    IoFailed = 3,
};

struct RunConfig {
    std::string subcommand;
    /// Positional arguments: file paths, or numbers for `schedule` and the
    /// alpha of `scaling-morph`. A path of "-" reads standard input.
    std::vector<std::string> inputs;
    /// Empty: write the result to standard output.
    std::string output;
    /// Minimality tolerance; defaults to 1e-9 for loops and 1e-2 for meshes.
    std::optional<double> rel_tol;
    double grad_tol = 1e-4;
    std::size_t frames = 201;
    std::uint64_t seed = 1;
    int max_iters = 500;
    double step_scale = 0.25;

    /// Throws InvalidArgument.
    void check() const;
};

std::vector<std::string> subcommands();

/// Runs one subcommand. Results go to `config.output` (written only when the
/// run succeeds) or to `out`; diagnostics go to `err`. Never throws.
int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace distmorph::cli
