#include "convpers/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "convpers/error.hpp"

namespace convpers {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_real(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::MalformedHeader, what + ": '" + text + "' is not a number");
}

std::size_t parse_index(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size() && v >= 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    fail(ErrorKind::MalformedHeader, what + ": '" + text + "' is not a non-negative integer");
}

// Next header token of a PGM, skipping whitespace and comments.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) fail(ErrorKind::MalformedHeader, "PGM header ended early");
    return tok;
}

bool has_extension(const std::filesystem::path& p, const char* ext) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return e == ext;
}

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double quantize(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IOError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Image parse_pgm(std::istream& in) {
    const std::string magic = pgm_token(in);
    if (magic != "P2" && magic != "P5") fail(ErrorKind::UnsupportedFormat, "not a P2/P5 PGM: " + magic);
    const std::size_t width = parse_index(pgm_token(in), "PGM width");
    const std::size_t height = parse_index(pgm_token(in), "PGM height");
    const std::size_t maxval = parse_index(pgm_token(in), "PGM maxval");
    if (width == 0 || height == 0) fail(ErrorKind::MalformedHeader, "PGM has zero extent");
    if (maxval == 0 || maxval > 65535) fail(ErrorKind::MalformedHeader, "PGM maxval out of range");

    const std::size_t n = width * height;
    std::vector<double> values(n);
    const double scale = static_cast<double>(maxval);
    if (magic == "P2") {
        for (std::size_t i = 0; i < n; ++i) {
            std::string tok;
            if (!(in >> tok)) fail(ErrorKind::MalformedHeader, "P2 payload truncated");
            const std::size_t v = parse_index(tok, "P2 sample");
            if (v > maxval) fail(ErrorKind::MalformedHeader, "P2 sample exceeds maxval");
            values[i] = static_cast<double>(v) / scale;
        }
    } else {
        const std::size_t bytes = maxval > 255 ? 2 : 1;
        std::string payload(n * bytes, '\0');
        in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
            fail(ErrorKind::MalformedHeader, "P5 payload truncated");
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t v = static_cast<unsigned char>(payload[i * bytes]);
            if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(payload[i * 2 + 1]);
            if (v > maxval) fail(ErrorKind::MalformedHeader, "P5 sample exceeds maxval");
            values[i] = static_cast<double>(v) / scale;
        }
    }
    return Image(GridShape{height, width}, 1, std::move(values));
}

Image parse_csv_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        for (const auto& f : split_fields(line)) row.push_back(parse_real(f, "CSV matrix entry"));
        if (!rows.empty() && row.size() != rows.front().size()) {
            fail(ErrorKind::MalformedHeader, "CSV matrix rows differ in length");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(ErrorKind::MalformedHeader, "CSV matrix is empty");
    return Image::from_rows(rows);
}

Image read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IOError, "cannot open " + path.string());
    const int c0 = in.peek();
    if (c0 == 'P') return parse_pgm(in);
    if (has_extension(path, ".csv") || has_extension(path, ".txt")) return parse_csv_matrix(in);
    fail(ErrorKind::UnsupportedFormat, "unrecognized image format: " + path.string());
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
    if (image.shape().dim() != 2 || image.channels() != 1) {
        fail(ErrorKind::DimMismatch, "PGM output needs a single-channel 2D image");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IOError, "cannot write " + path.string());
    out << "P5\n" << image.shape().extent(1) << ' ' << image.shape().extent(0) << "\n255\n";
    for (double v : image.values()) {
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
    if (!out) fail(ErrorKind::IOError, "write failed: " + path.string());
}

void write_csv_matrix(std::ostream& out, const Image& image) {
    if (image.shape().dim() != 2 || image.channels() != 1) {
        fail(ErrorKind::DimMismatch, "CSV matrix output needs a single-channel 2D image");
    }
    const std::size_t cols = image.shape().extent(1);
    for (std::size_t r = 0; r < image.shape().extent(0); ++r) {
        for (std::size_t c = 0; c < cols; ++c) out << (c ? "," : "") << format_real(image.at(r * cols + c));
        out << '\n';
    }
}

std::vector<ManifestRow> read_manifest(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "path,label") {
        fail(ErrorKind::MalformedHeader, "manifest must start with 'path,label'");
    }
    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 2 || f[0].empty() || f[1].empty()) {
            fail(ErrorKind::MalformedHeader, "manifest row needs a path and a nonempty label: " + line);
        }
        rows.push_back({f[0], f[1]});
    }
    return rows;
}

void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows) {
    out << "path,label\n";
    for (const auto& r : rows) out << r.path << ',' << r.label << '\n';
}

LabeledImages load_dataset(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) fail(ErrorKind::IOError, "cannot open manifest " + manifest.string());
    const auto rows = read_manifest(in);
    LabeledImages data;
    for (const auto& r : rows) data.class_names.push_back(r.label);
    std::sort(data.class_names.begin(), data.class_names.end());
    data.class_names.erase(std::unique(data.class_names.begin(), data.class_names.end()), data.class_names.end());
    const auto base = manifest.parent_path();
    for (const auto& r : rows) {
        const auto p = base / r.path;
        if (!std::filesystem::exists(p)) fail(ErrorKind::IOError, "manifest entry missing: " + p.string());
        data.images.push_back(read_image(p));
        const auto it = std::lower_bound(data.class_names.begin(), data.class_names.end(), r.label);
        data.labels.push_back(static_cast<std::size_t>(it - data.class_names.begin()));
    }
    return data;
}

void SyntheticSpec::validate() const {
    if (size < 4) fail(ErrorKind::BadSpec, "synthetic image size must be >= 4");
    if (count < 1) fail(ErrorKind::BadSpec, "synthetic count per class must be >= 1");
    if (!(noise >= 0.0) || !std::isfinite(noise)) fail(ErrorKind::BadSpec, "synthetic noise must be >= 0");
}

LabeledImages generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    LabeledImages data;
    const std::size_t n = spec.size;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double two_pi = 2.0 * std::numbers::pi;

    if (spec.family == SyntheticFamily::Stripes) {
        data.class_names = {"diagonal", "horizontal", "vertical"};
    } else {
        data.class_names = {"blobs1", "blobs2", "blobs3"};
    }
    for (std::size_t cls = 0; cls < 3; ++cls) {
        for (std::size_t s = 0; s < spec.count; ++s) {
            std::vector<double> v(n * n, 0.0);
            if (spec.family == SyntheticFamily::Stripes) {
                const double period = 3.0 + 3.0 * unit(rng);
                const double phase = two_pi * unit(rng);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const double di = static_cast<double>(i), dj = static_cast<double>(j);
                        const double t = cls == 0 ? (di + dj) / std::numbers::sqrt2 : cls == 1 ? di : dj;
                        v[i * n + j] = 0.5 + 0.5 * std::sin(two_pi * t / period + phase);
                    }
                }
            } else {
                const double lo = 1.5, span = static_cast<double>(n) - 4.0;
                for (std::size_t b = 0; b <= cls; ++b) {
                    const double ci = lo + span * unit(rng), cj = lo + span * unit(rng);
                    const double sigma = 1.0 + 0.6 * unit(rng);
                    for (std::size_t i = 0; i < n; ++i) {
                        for (std::size_t j = 0; j < n; ++j) {
                            const double di = static_cast<double>(i) - ci, dj = static_cast<double>(j) - cj;
                            v[i * n + j] = std::max(v[i * n + j], std::exp(-(di * di + dj * dj) / (2 * sigma * sigma)));
                        }
                    }
                }
            }
            for (double& x : v) x = quantize(x + spec.noise * noise(rng));
            data.images.emplace_back(GridShape{n, n}, 1, std::move(v));
            data.labels.push_back(cls);
        }
    }
    return data;
}

void write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
    const LabeledImages data = generate_synthetic(spec);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::IOError, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<ManifestRow> rows;
    std::vector<std::size_t> seen(data.class_names.size(), 0);
    for (std::size_t i = 0; i < data.images.size(); ++i) {
        const auto& label = data.class_names[data.labels[i]];
        char name[64];
        std::snprintf(name, sizeof name, "%s_%03zu.pgm", label.c_str(), seen[data.labels[i]]++);
        write_pgm(dir / name, data.images[i]);
        rows.push_back({name, label});
    }
    std::ofstream out(dir / "manifest.csv");
    if (!out) fail(ErrorKind::IOError, "cannot write manifest in " + dir.string());
    write_manifest(out, rows);
}

void write_bank(std::ostream& out, const FilterBank& bank) {
    out << "# provenance=" << to_string(bank.provenance) << " normalization=" << to_string(bank.normalization)
        << " seed=" << bank.seed << " n_components=" << bank.n_components << '\n';
    for (const auto& w : bank.warnings) out << "# warning: " << w << '\n';
    out << "id,shape,channels,values\n";
    for (const auto& f : bank.filters) {
        out << f.id() << ',' << f.shape().to_string() << ',' << f.channels();
        for (double v : f.values()) out << ',' << format_real(v);
        out << '\n';
    }
}

FilterBank read_bank(std::istream& in) {
    FilterBank bank;
    bank.provenance = BankProvenance::File;
    bank.normalization = Normalization::Raw;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::stringstream ss(line.substr(1));
            std::string kv;
            while (ss >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
                if (key == "provenance") {
                    for (auto p : {BankProvenance::Trivial, BankProvenance::Standard, BankProvenance::Random,
                                   BankProvenance::Eigen, BankProvenance::File}) {
                        if (to_string(p) == value) bank.provenance = p;
                    }
                } else if (key == "normalization") bank.normalization = value == "l2" ? Normalization::L2Unit : Normalization::Raw;
                else if (key == "seed") bank.seed = parse_index(value, "bank seed");
                else if (key == "n_components") bank.n_components = parse_index(value, "bank n_components");
            }
            continue;
        }
        if (!header) {
            if (line.rfind("id,shape,channels", 0) != 0) {
                fail(ErrorKind::MalformedHeader, "filter bank must have header 'id,shape,channels,values'");
            }
            header = true;
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() < 4) fail(ErrorKind::MalformedHeader, "filter row too short: " + line);
        const GridShape shape = GridShape::parse(f[1]);
        const std::size_t channels = parse_index(f[2], "filter channels");
        std::vector<double> values;
        for (std::size_t i = 3; i < f.size(); ++i) values.push_back(parse_real(f[i], "filter value"));
        if (values.size() != shape.size() * channels) {
            fail(ErrorKind::MalformedHeader, "filter " + f[0] + " has the wrong number of values");
        }
        bank.filters.emplace_back(shape, channels, std::move(values), f[0]);
    }
    if (!header) fail(ErrorKind::MalformedHeader, "filter bank header missing");
    bank.validate();
    return bank;
}

std::vector<std::vector<std::size_t>> read_simplices(std::istream& in) {
    std::vector<std::vector<std::size_t>> out;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::size_t> s;
        while (ss >> tok) s.push_back(parse_index(tok, "vertex id"));
        out.push_back(std::move(s));
    }
    return out;
}

Matrix read_vertex_values(std::istream& in) {
    std::map<std::size_t, std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_fields(line);
        if (first && !f.empty() && !f[0].empty() && !std::isdigit(static_cast<unsigned char>(f[0][0]))) {
            first = false;  // header row
            continue;
        }
        first = false;
        if (f.size() < 2) fail(ErrorKind::MalformedHeader, "vertex row needs an id and at least one value");
        const std::size_t id = parse_index(f[0], "vertex id");
        std::vector<double> v;
        for (std::size_t i = 1; i < f.size(); ++i) v.push_back(parse_real(f[i], "vertex value"));
        if (!rows.emplace(id, std::move(v)).second) fail(ErrorKind::MalformedHeader, "duplicate vertex id");
    }
    if (rows.empty()) fail(ErrorKind::MalformedHeader, "no vertex values");
    const std::size_t n = rows.size(), d = rows.begin()->second.size();
    Matrix m(n, d);
    std::size_t expect = 0;
    for (const auto& [id, v] : rows) {
        if (id != expect++) fail(ErrorKind::MalformedHeader, "vertex ids must cover 0..n-1");
        if (v.size() != d) fail(ErrorKind::MalformedHeader, "vertex rows differ in length");
        for (std::size_t j = 0; j < d; ++j) m(id, j) = v[j];
    }
    return m;
}

FilteredComplex read_cells(std::istream& in) {
    std::string line;
    bool header = false;
    std::vector<Cell> cells;
    std::size_t vertex_count = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("dim,value", 0) != 0) fail(ErrorKind::MalformedHeader, "cells file needs header 'dim,value,faces'");
            header = true;
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() < 2 || f.size() > 3) fail(ErrorKind::MalformedHeader, "cell row must be dim,value[,faces]: " + line);
        Cell c;
        c.id = cells.size();
        c.dim = parse_index(f[0], "cell dim");
        c.value = f[1] == "inf" ? kInfinity : parse_real(f[1], "cell value");
        if (f.size() == 3) {
            std::stringstream ss(f[2]);
            std::string tok;
            while (ss >> tok) c.faces.push_back(parse_index(tok, "face row"));
        }
        std::sort(c.faces.begin(), c.faces.end());
        if (c.dim == 0) ++vertex_count;
        cells.push_back(std::move(c));
    }
    if (!header) fail(ErrorKind::MalformedHeader, "cells file header missing");
    return FilteredComplex(std::move(cells), ComplexKind::Generic, vertex_count);
}

std::string diagram_svg(const PersistenceDiagram& diagram) {
    constexpr double size = 400.0, margin = 40.0, plot = size - 2 * margin;
    double lo = kInfinity, hi = -kInfinity;
    bool essential = false;
    for (const auto& p : diagram.points) {
        lo = std::min(lo, p.birth);
        hi = std::max(hi, p.birth);
        if (p.essential()) essential = true;
        else hi = std::max(hi, p.death);
    }
    if (lo > hi) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo <= 0.0) hi = lo + 1.0;
    const double inf_level = hi + 0.1 * (hi - lo);
    const double top = essential ? inf_level : hi;
    const auto sx = [&](double v) { return margin + (v - lo) / (top - lo) * plot; };
    const auto sy = [&](double v) { return size - margin - (v - lo) / (top - lo) * plot; };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
    out << "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
    out << "<line class=\"axis\" x1=\"" << svg_num(margin) << "\" y1=\"" << svg_num(size - margin) << "\" x2=\""
        << svg_num(size - margin) << "\" y2=\"" << svg_num(size - margin) << "\" stroke=\"black\"/>\n";
    out << "<line class=\"axis\" x1=\"" << svg_num(margin) << "\" y1=\"" << svg_num(size - margin) << "\" x2=\""
        << svg_num(margin) << "\" y2=\"" << svg_num(margin) << "\" stroke=\"black\"/>\n";
    out << "<line class=\"diagonal\" x1=\"" << svg_num(sx(lo)) << "\" y1=\"" << svg_num(sy(lo)) << "\" x2=\""
        << svg_num(sx(top)) << "\" y2=\"" << svg_num(sy(top)) << "\" stroke=\"gray\"/>\n";
    out << "<text x=\"" << svg_num(size / 2) << "\" y=\"" << svg_num(size - 10) << "\" text-anchor=\"middle\">birth</text>\n";
    out << "<text x=\"12\" y=\"" << svg_num(size / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 12 "
        << svg_num(size / 2) << ")\">death</text>\n";
    if (essential) {
        out << "<line class=\"infinity\" x1=\"" << svg_num(margin) << "\" y1=\"" << svg_num(sy(inf_level)) << "\" x2=\""
            << svg_num(size - margin) << "\" y2=\"" << svg_num(sy(inf_level)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }
    PersistenceDiagram sorted = diagram;
    sorted.canonicalize();
    for (const auto& p : sorted.points) {
        const double y = p.essential() ? inf_level : p.death;
        out << "<circle class=\"point\" cx=\"" << svg_num(sx(p.birth)) << "\" cy=\"" << svg_num(sy(y))
            << "\" r=\"4\" fill=\"" << colors[std::min<std::size_t>(p.dim, 3)] << "\"><title>H" << p.dim << " ("
            << format_real(p.birth) << ", " << (p.essential() ? "inf" : format_real(p.death)) << ")</title></circle>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace convpers
