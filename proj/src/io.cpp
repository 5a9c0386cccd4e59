#include <distmorph/io.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <distmorph/error.hpp>

namespace distmorph::io {

namespace {

// Line reader that skips blank lines and `#` comments and tracks line numbers.
class LineReader {
public:
    LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

    bool next(std::istringstream& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line.erase(hash);
            }
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            fields.clear();
            fields.str(line);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << name_ << ":" << line_ << ": " << what;
        throw Error(ErrorCode::Parse, msg.str(), line_);
    }

    void require(std::istringstream& fields, const std::string& what) {
        if (!next(fields)) {
            fail("unexpected end of file, expected " + what);
        }
    }

    // Trailing tokens are an error.
    void expect_end(std::istringstream& fields) const {
        std::string extra;
        if (fields >> extra) {
            fail("unexpected token '" + extra + "'");
        }
    }

private:
    std::istream& in_;
    std::string name_;
    std::size_t line_ = 0;
};

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template<typename Reader>
auto load_with(const std::filesystem::path& path, Reader&& reader) {
    std::istringstream in(read_all(path));
    return reader(in, path.string());
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

DiscreteManifold read_curve(std::istream& in, const std::string& name) {
    LineReader reader(in, name);
    std::istringstream fields;
    reader.require(fields, "LOOP2D header");
    std::string tag;
    long long count = -1;
    if (!(fields >> tag) || tag != "LOOP2D") {
        reader.fail("expected header 'LOOP2D <count>'");
    }
    if (!(fields >> count) || count < 2) {
        reader.fail("invalid vertex count");
    }
    reader.expect_end(fields);
    std::vector<Point> points;
    points.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        reader.require(fields, "vertex line");
        double x = 0.0;
        double y = 0.0;
        if (!(fields >> x >> y)) {
            reader.fail("expected '<x> <y>'");
        }
        reader.expect_end(fields);
        points.emplace_back(x, y, 0.0);
    }
    if (reader.next(fields)) {
        reader.fail("trailing data after " + std::to_string(count) + " vertices");
    }
    return DiscreteManifold::loop(std::move(points));
}

void write_curve(std::ostream& out, const DiscreteManifold& curve) {
    if (curve.dim() != 1) {
        throw Error(ErrorCode::InvalidArgument, "write_curve needs a loop");
    }
    out << "LOOP2D " << curve.vertex_count() << '\n';
    for (const auto& p : curve.vertices()) {
        out << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
    }
}

DiscreteManifold read_mesh(std::istream& in, const std::string& name) {
    LineReader reader(in, name);
    std::istringstream fields;
    reader.require(fields, "OFF header");
    std::string tag;
    fields >> tag;
    if (tag != "OFF") {
        reader.fail("expected header 'OFF'");
    }
    long long nv = -1;
    long long nf = -1;
    long long ne = 0;
    // Counts may share the header line.
    if (!(fields >> nv)) {
        reader.require(fields, "counts line");
        if (!(fields >> nv)) {
            reader.fail("expected '<vertices> <faces> <edges>'");
        }
    }
    if (!(fields >> nf) || nv < 3 || nf < 1) {
        reader.fail("invalid vertex/face counts");
    }
    fields >> ne;
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(nv));
    for (long long i = 0; i < nv; ++i) {
        reader.require(fields, "vertex line");
        double x = 0.0;
        double y = 0.0;
        double z = 0.0;
        if (!(fields >> x >> y >> z)) {
            reader.fail("expected '<x> <y> <z>'");
        }
        vertices.emplace_back(x, y, z);
    }
    std::vector<Face> faces;
    faces.reserve(static_cast<std::size_t>(nf));
    for (long long f = 0; f < nf; ++f) {
        reader.require(fields, "face line");
        long long k = 0;
        long long a = -1;
        long long b = -1;
        long long c = -1;
        if (!(fields >> k)) {
            reader.fail("expected face vertex count");
        }
        if (k != 3) {
            reader.fail("only triangular faces are supported");
        }
        if (!(fields >> a >> b >> c)) {
            reader.fail("expected 3 vertex indices");
        }
        for (long long idx : {a, b, c}) {
            if (idx < 0 || idx >= nv) {
                reader.fail("vertex index " + std::to_string(idx) + " out of range");
            }
        }
        faces.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c)});
    }
    return DiscreteManifold::mesh(std::move(vertices), std::move(faces));
}

void write_mesh(std::ostream& out, const DiscreteManifold& mesh) {
    if (mesh.dim() != 2) {
        throw Error(ErrorCode::InvalidArgument, "write_mesh needs a triangle mesh");
    }
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.simplex_count() << " 0\n";
    for (const auto& p : mesh.vertices()) {
        out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
    }
    for (const Face& f : mesh.faces()) {
        out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
}

DiscreteManifold read_manifold(std::istream& in, const std::string& name) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream probe(text);
    std::string first;
    probe >> first;
    std::istringstream body(text);
    if (first == "LOOP2D") {
        return read_curve(body, name);
    }
    if (first == "OFF") {
        return read_mesh(body, name);
    }
    throw Error(ErrorCode::Parse, name + ": unknown format, expected 'LOOP2D' or 'OFF' header");
}

void write_manifold(std::ostream& out, const DiscreteManifold& manifold) {
    if (manifold.dim() == 1) {
        write_curve(out, manifold);
    }
    else {
        write_mesh(out, manifold);
    }
}

Morph read_morph(std::istream& in, const std::string& name) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(in);
    }
    catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, name + ": " + e.what());
    }

    auto fail = [&](const std::string& what) -> Error {
        return Error(ErrorCode::Parse, name + ": " + what);
    };
    try {
        if (!doc.is_object() || !doc.contains("dimension") || !doc.contains("times") || !doc.contains("frames")) {
            throw fail("morph needs 'dimension', 'times' and 'frames'");
        }
        const int dim = doc.at("dimension").get<int>();
        if (dim != 1 && dim != 2) {
            throw fail("dimension must be 1 or 2");
        }
        if ((dim == 2) != doc.contains("faces")) {
            throw fail("'faces' must be present exactly when dimension is 2");
        }
        auto times = doc.at("times").get<std::vector<double>>();
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (!(times[k] > times[k - 1])) {
                throw Error(ErrorCode::ValidationFailure,
                            name + ": times are not strictly increasing at index " + std::to_string(k), k);
            }
        }
        const auto& jframes = doc.at("frames");
        if (!jframes.is_array() || jframes.empty()) {
            throw fail("'frames' must be a nonempty array");
        }
        const std::size_t coords = dim == 1 ? 2 : 3;
        std::vector<std::vector<Point>> frames;
        for (std::size_t k = 0; k < jframes.size(); ++k) {
            std::vector<Point> pts;
            for (const auto& jp : jframes[k]) {
                const auto c = jp.get<std::vector<double>>();
                if (c.size() != coords) {
                    throw fail("frame " + std::to_string(k) + ": points need " + std::to_string(coords) + " coordinates");
                }
                pts.emplace_back(c[0], c[1], coords == 3 ? c[2] : 0.0);
            }
            frames.push_back(std::move(pts));
        }
        DiscreteManifold source = dim == 1
            ? DiscreteManifold::loop(frames.front())
            : DiscreteManifold::mesh(frames.front(), doc.at("faces").get<std::vector<Face>>());
        try {
            return Morph(source, std::move(times), std::move(frames));
        }
        catch (const Error& e) {
            throw Error(ErrorCode::ValidationFailure, name + ": " + e.what(), e.index());
        }
    }
    catch (const json::exception& e) {
        throw fail(e.what());
    }
}

void write_morph(std::ostream& out, const Morph& morph) {
    const bool mesh = morph.dim() == 2;
    out << "{\n  \"dimension\": " << morph.dim() << ",\n  \"times\": [";
    const auto times = morph.times();
    for (std::size_t k = 0; k < times.size(); ++k) {
        out << (k ? ", " : "") << format_double(times[k]);
    }
    out << "],\n  \"frames\": [\n";
    for (std::size_t k = 0; k < morph.frame_count(); ++k) {
        out << "    [";
        const auto v = morph.frame(k).vertices();
        for (std::size_t i = 0; i < v.size(); ++i) {
            out << (i ? ", " : "") << '[' << format_double(v[i].x()) << ", " << format_double(v[i].y());
            if (mesh) {
                out << ", " << format_double(v[i].z());
            }
            out << ']';
        }
        out << (k + 1 < morph.frame_count() ? "],\n" : "]\n");
    }
    out << "  ]";
    if (mesh) {
        out << ",\n  \"faces\": [";
        const auto faces = morph.source().faces();
        for (std::size_t f = 0; f < faces.size(); ++f) {
            out << (f ? ", " : "") << '[' << faces[f][0] << ", " << faces[f][1] << ", " << faces[f][2] << ']';
        }
        out << ']';
    }
    out << "\n}\n";
}

DiscreteManifold load_curve(const std::filesystem::path& path) {
    DiscreteManifold m = load_with(path, [](std::istream& in, const std::string& n) { return read_curve(in, n); });
    require_valid(m);
    return m;
}

DiscreteManifold load_mesh(const std::filesystem::path& path) {
    DiscreteManifold m = load_with(path, [](std::istream& in, const std::string& n) { return read_mesh(in, n); });
    require_valid(m);
    return m;
}

DiscreteManifold load_manifold(const std::filesystem::path& path) {
    DiscreteManifold m = load_with(path, [](std::istream& in, const std::string& n) { return read_manifold(in, n); });
    require_valid(m);
    return m;
}

Morph load_morph(const std::filesystem::path& path) {
    Morph m = load_with(path, [](std::istream& in, const std::string& n) { return read_morph(in, n); });
    require_valid(m);
    return m;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        }
        out << contents;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw Error(ErrorCode::Io, "failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::Io, "cannot move output into place: " + path.string());
    }
}

namespace {

template<typename Writer>
void save_with(const std::filesystem::path& path, Writer&& writer) {
    std::ostringstream out;
    writer(out);
    write_file_atomically(path, out.str());
}

} // namespace

void save_curve(const std::filesystem::path& path, const DiscreteManifold& curve) {
    save_with(path, [&](std::ostream& out) { write_curve(out, curve); });
}

void save_mesh(const std::filesystem::path& path, const DiscreteManifold& mesh) {
    save_with(path, [&](std::ostream& out) { write_mesh(out, mesh); });
}

void save_manifold(const std::filesystem::path& path, const DiscreteManifold& manifold) {
    save_with(path, [&](std::ostream& out) { write_manifold(out, manifold); });
}

void save_morph(const std::filesystem::path& path, const Morph& morph) {
    save_with(path, [&](std::ostream& out) { write_morph(out, morph); });
}

} // namespace distmorph::io
