#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <distmorph/geometry.hpp>
#include <distmorph/morph.hpp>

namespace distmorph::io {

/// "%.17g": enough digits for an exact double round trip.
std::string format_double(double value);

// Loop files: first line `LOOP2D <count>`, then one `<x> <y>` line per
// vertex. The closing edge is implicit. Blank lines and `#` comments are
// skipped.
DiscreteManifold read_curve(std::istream& in, const std::string& name = "<stream>");
void write_curve(std::ostream& out, const DiscreteManifold& curve);

// OFF: `OFF`, then `<vertices> <faces> <edges>`, vertex lines, then
// `3 i j k` face lines.
DiscreteManifold read_mesh(std::istream& in, const std::string& name = "<stream>");
void write_mesh(std::ostream& out, const DiscreteManifold& mesh);

/// Chooses the reader from the first token (`LOOP2D` or `OFF`).
DiscreteManifold read_manifold(std::istream& in, const std::string& name = "<stream>");
void write_manifold(std::ostream& out, const DiscreteManifold& manifold);

// Morph files are JSON objects with `dimension`, `times`, `frames` (one array
// of [x, y] or [x, y, z] points per time) and, for dimension 2 only, `faces`.
Morph read_morph(std::istream& in, const std::string& name = "<stream>");
void write_morph(std::ostream& out, const Morph& morph);

// Path wrappers. Loaders validate the result and throw ValidationFailure
// with the diagnostics; unreadable files throw Io.
DiscreteManifold load_curve(const std::filesystem::path& path);
DiscreteManifold load_mesh(const std::filesystem::path& path);
DiscreteManifold load_manifold(const std::filesystem::path& path);
Morph load_morph(const std::filesystem::path& path);

void save_curve(const std::filesystem::path& path, const DiscreteManifold& curve);
void save_mesh(const std::filesystem::path& path, const DiscreteManifold& mesh);
void save_manifold(const std::filesystem::path& path, const DiscreteManifold& manifold);
void save_morph(const std::filesystem::path& path, const Morph& morph);

/// Writes through a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial file behind.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

} // namespace distmorph::io
