#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "convpers/error.hpp"
#include "convpers/io.hpp"
#include "convpers/learn.hpp"
#include "convpers/metrics.hpp"
#include "convpers/persistence.hpp"
#include "convpers/transforms.hpp"
#include "convpers/vectorize.hpp"

namespace convpers::cli {

namespace fs = std::filesystem;

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UnsupportedFormat:
        case ErrorKind::MalformedHeader:
        case ErrorKind::BadSpec:
            return 2;
        case ErrorKind::IOError:
            return 4;
        default:
            return 3;
    }
}

// Shared options that steer complex construction and reduction.
struct CommonOptions {
    std::string construction = "upper";
    std::size_t max_dim = 2;
    bool keep_diagonal = false;
    bool superlevel = false;
    std::uint64_t seed = 0;

    TransformOptions transform() const {
        TransformOptions o;
        o.construction = construction == "lower" ? Construction::LowerStar : Construction::UpperStar;
        o.max_dim = max_dim;
        o.keep_diagonal = keep_diagonal;
        o.level = superlevel ? Level::Superlevel : Level::Sublevel;
        return o;
    }
};

void add_common(CLI::App* cmd, CommonOptions& c) {
    cmd->add_option("--construction", c.construction, "Cubical construction for images")
        ->check(CLI::IsMember({"lower", "upper"}));
    cmd->add_option("--max-dim", c.max_dim, "Skeleton dimension m");
    cmd->add_flag("--keep-diagonal", c.keep_diagonal, "Keep zero-persistence points");
    cmd->add_flag("--superlevel", c.superlevel, "Filter by superlevel sets");
    cmd->add_option("--seed", c.seed, "Random seed");
}

Ground parse_ground(const std::string& g) { return g == "l2" ? Ground::L2 : Ground::LInf; }

// Writes to `path`, or to `out` when path is empty or "-".
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) fail(ErrorKind::IOError, "cannot write " + path);
    fn(file);
    if (!file) fail(ErrorKind::IOError, "write failed: " + path);
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IOError, "cannot open " + path);
    return in;
}

PersistenceDiagram load_diagram(const std::string& path) {
    auto in = open_in(path);
    return read_diagram_csv(in);
}

// Complex from --cells or --simplices/--values, applying the chosen column.
FilteredComplex load_complex(const std::string& cells, const std::string& simplices, const std::string& values,
                             std::size_t column) {
    if (!cells.empty()) {
        auto in = open_in(cells);
        return read_cells(in);
    }
    if (simplices.empty() || values.empty()) {
        fail(ErrorKind::InvalidArgument, "need an image, --cells, or --simplices with --values");
    }
    auto sin = open_in(simplices);
    auto vin = open_in(values);
    const auto simplex_list = read_simplices(sin);
    const Matrix vals = read_vertex_values(vin);
    if (column >= vals.cols()) fail(ErrorKind::InvalidArgument, "--column out of range");
    std::vector<double> f(vals.rows());
    for (std::size_t i = 0; i < vals.rows(); ++i) f[i] = vals(i, column);
    return simplicial_lower_star(simplex_list, f);
}

FilterBank load_bank(const std::string& bank_path, const std::string& kind, std::size_t count, std::size_t size,
                     std::size_t dim, std::size_t channels, std::uint64_t seed) {
    if (!bank_path.empty()) {
        auto in = open_in(bank_path);
        return read_bank(in);
    }
    if (kind == "trivial") return trivial_filter(dim, channels);
    if (kind == "standard") return standard_filters();
    if (kind == "random") return random_filters(GridShape(std::vector<std::size_t>(dim, size)), channels, count, seed);
    fail(ErrorKind::InvalidArgument, "bank kind must be trivial, standard or random (or use --bank)");
}

std::vector<std::size_t> parse_dims(const std::string& text) {
    std::vector<std::size_t> dims;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            dims.push_back(static_cast<std::size_t>(std::stoul(item)));
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidArgument, "bad dimension list '" + text + "'");
        }
    }
    return dims;
}

std::vector<double> parse_reals(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidArgument, "bad number list '" + text + "'");
        }
    }
    return v;
}

// One vectorize sample: its name and per-filter diagrams.
struct Sample {
    std::string name;
    std::vector<std::string> ids;
    std::vector<PersistenceDiagram> diagrams;
};

Sample load_sample(const std::string& path) {
    Sample s;
    s.name = path;
    if (fs::is_directory(path)) {
        auto in = open_in((fs::path(path) / "index.csv").string());
        std::string line;
        std::getline(in, line);
        if (line != "filter_id,file,cap") fail(ErrorKind::MalformedHeader, "index.csv needs header filter_id,file,cap");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string id, file, cap;
            std::getline(ss, id, ',');
            std::getline(ss, file, ',');
            std::getline(ss, cap, ',');
            auto d = load_diagram((fs::path(path) / file).string());
            try {
                d.cap = std::stod(cap);
            } catch (const std::exception&) {
                fail(ErrorKind::MalformedHeader, "bad cap in index.csv: " + cap);
            }
            s.ids.push_back(id);
            s.diagrams.push_back(std::move(d));
        }
    } else {
        s.ids.push_back("d0");
        s.diagrams.push_back(load_diagram(path));
    }
    return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Convolutional persistence toolkit", "convpers"};
    app.require_subcommand(1);

    // diagram
    CommonOptions diag_opts;
    std::string diag_image, diag_cells, diag_simplices, diag_values, diag_out;
    std::size_t diag_column = 0;
    auto* diagram = app.add_subcommand("diagram", "Persistence diagram of an image or complex");
    diagram->add_option("image", diag_image, "PGM or CSV image");
    diagram->add_option("--cells", diag_cells, "Explicit complex (dim,value,faces)");
    diagram->add_option("--simplices", diag_simplices, "Simplex list");
    diagram->add_option("--values", diag_values, "Vertex values CSV");
    diagram->add_option("--column", diag_column, "Vertex value column (0-based)");
    diagram->add_option("-o,--output", diag_out, "Output CSV (default stdout)");
    add_common(diagram, diag_opts);

    // cpt
    CommonOptions cpt_opts;
    std::string cpt_input, cpt_bank, cpt_kind = "random", cpt_out;
    std::size_t cpt_count = 25, cpt_size = 3, cpt_stride = 1;
    auto* cpt = app.add_subcommand("cpt", "Convolutional persistence over a filter bank");
    cpt->add_option("image", cpt_input, "PGM or CSV image")->required();
    cpt->add_option("--bank", cpt_bank, "Filter-bank CSV");
    cpt->add_option("--kind", cpt_kind, "Generated bank kind when --bank is absent")
        ->check(CLI::IsMember({"trivial", "standard", "random"}));
    cpt->add_option("--count", cpt_count, "Random filter count");
    cpt->add_option("--size", cpt_size, "Random filter side length");
    cpt->add_option("--stride", cpt_stride, "Stride along every axis");
    cpt->add_option("-o,--output", cpt_out, "Output directory")->required();
    add_common(cpt, cpt_opts);

    // euler
    CommonOptions eu_opts;
    std::string eu_image, eu_cells, eu_simplices, eu_values, eu_out, eu_thresholds, eu_bank, eu_kind;
    std::size_t eu_column = 0, eu_count = 25, eu_size = 3, eu_stride = 1;
    auto* euler = app.add_subcommand("euler", "Euler characteristic curve");
    euler->add_option("image", eu_image, "PGM or CSV image");
    euler->add_option("--cells", eu_cells, "Explicit complex (dim,value,faces)");
    euler->add_option("--simplices", eu_simplices, "Simplex list");
    euler->add_option("--values", eu_values, "Vertex values CSV");
    euler->add_option("--column", eu_column, "Vertex value column (0-based)");
    euler->add_option("--thresholds", eu_thresholds, "Comma-separated thresholds (default: all filtration values)");
    euler->add_option("--bank", eu_bank, "Filter-bank CSV (image input)");
    euler->add_option("--kind", eu_kind, "Generated bank kind (image input)")
        ->check(CLI::IsMember({"trivial", "standard", "random"}));
    euler->add_option("--count", eu_count, "Random filter count");
    euler->add_option("--size", eu_size, "Random filter side length");
    euler->add_option("--stride", eu_stride, "Stride along every axis");
    euler->add_option("-o,--output", eu_out, "Output CSV (default stdout)");
    add_common(euler, eu_opts);

    // distance
    std::string dist_a, dist_b, dist_metric = "bottleneck", dist_ground = "linf";
    double dist_p = 2.0;
    std::optional<double> dist_eps;
    auto* distance = app.add_subcommand("distance", "Distance between two diagram CSVs");
    distance->add_option("a", dist_a, "First diagram")->required();
    distance->add_option("b", dist_b, "Second diagram")->required();
    distance->add_option("--metric", dist_metric, "bottleneck, wasserstein or sinkhorn")
        ->check(CLI::IsMember({"bottleneck", "wasserstein", "sinkhorn"}));
    distance->add_option("--p", dist_p, "Wasserstein order");
    distance->add_option("--epsilon", dist_eps, "Sinkhorn regularization (default 0.01 x cost scale)");
    distance->add_option("--ground", dist_ground, "Ground metric")->check(CLI::IsMember({"linf", "l2"}));

    // vectorize
    std::vector<std::string> vec_inputs;
    std::string vec_method = "total", vec_combine = "concat", vec_dims = "0,1", vec_out;
    std::size_t vec_pixels = 10;
    auto* vectorize = app.add_subcommand("vectorize", "Feature matrix from diagrams");
    vectorize->add_option("inputs", vec_inputs, "Diagram CSVs or cpt output directories")->required();
    vectorize->add_option("--method", vec_method, "total or image")->check(CLI::IsMember({"total", "image"}));
    vectorize->add_option("--combine", vec_combine, "concat or average")->check(CLI::IsMember({"concat", "average"}));
    vectorize->add_option("--dims", vec_dims, "Homology dimensions, comma-separated");
    vectorize->add_option("--pixels", vec_pixels, "Persistence image resolution per axis");
    vectorize->add_option("-o,--output", vec_out, "Output CSV (default stdout)");

    // filters
    std::string fil_kind = "random", fil_manifest, fil_out;
    std::size_t fil_count = 25, fil_size = 3, fil_components = 3, fil_channels = 1;
    std::uint64_t fil_seed = 0;
    auto* filters = app.add_subcommand("filters", "Emit a filter bank");
    filters->add_option("--kind", fil_kind, "random, standard, trivial or eigen")
        ->check(CLI::IsMember({"random", "standard", "trivial", "eigen"}));
    filters->add_option("--count", fil_count, "Number of filters");
    filters->add_option("--size", fil_size, "Filter side length");
    filters->add_option("--channels", fil_channels, "Channel count");
    filters->add_option("--components", fil_components, "Principal components (eigen)");
    filters->add_option("--manifest", fil_manifest, "Training manifest (eigen)");
    filters->add_option("--seed", fil_seed, "Random seed");
    filters->add_option("-o,--output", fil_out, "Output CSV (default stdout)");

    // classify
    std::string cls_config, cls_json;
    std::optional<std::uint64_t> cls_seed;
    auto* classify = app.add_subcommand("classify", "Run a kNN classification experiment");
    classify->add_option("config", cls_config, "key = value config file")->required();
    classify->add_option("--json", cls_json, "Report JSON path");
    classify->add_option("--seed", cls_seed, "Master seed (overrides the config)");

    // plot
    std::string plot_in, plot_out;
    auto* plot = app.add_subcommand("plot", "SVG scatter of a diagram");
    plot->add_option("diagram", plot_in, "Diagram CSV")->required();
    plot->add_option("-o,--output", plot_out, "Output SVG (default stdout)");

    // synth
    std::string syn_family = "stripes", syn_out;
    SyntheticSpec syn;
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
    synth->add_option("--family", syn_family, "stripes or blobs")->check(CLI::IsMember({"stripes", "blobs"}));
    synth->add_option("--size", syn.size, "Image side length");
    synth->add_option("--count", syn.count, "Images per class");
    synth->add_option("--noise", syn.noise, "Gaussian noise level");
    synth->add_option("--seed", syn.seed, "Random seed");
    synth->add_option("-o,--output", syn_out, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*diagram) {
            PersistenceDiagram d;
            if (!diag_image.empty()) {
                d = image_persistence(read_image(diag_image), diag_opts.transform());
            } else {
                const auto k = load_complex(diag_cells, diag_simplices, diag_values, diag_column);
                ReductionOptions ro;
                ro.keep_diagonal = diag_opts.keep_diagonal;
                d = reduce_and_pair(skeleton(k, diag_opts.max_dim), ro);
            }
            emit(diag_out, out, [&](std::ostream& o) { write_diagram_csv(o, d); });
        } else if (*cpt) {
            const Image f = read_image(cpt_input);
            const FilterBank bank = load_bank(cpt_bank, cpt_kind, cpt_count, cpt_size, f.shape().dim(), f.channels(),
                                              cpt_opts.seed);
            const Stride k(std::vector<std::size_t>(f.shape().dim(), cpt_stride));
            const CPTResult r = cpt_image(f, bank, k, cpt_opts.transform());
            std::error_code ec;
            fs::create_directories(cpt_out, ec);
            if (ec) fail(ErrorKind::IOError, "cannot create " + cpt_out);
            std::ostringstream index;
            index << "filter_id,file,cap\n";
            for (std::size_t i = 0; i < r.entries.size(); ++i) {
                const auto& e = r.entries[i];
                const std::string file = "diagram_" + std::to_string(i) + ".csv";
                emit((fs::path(cpt_out) / file).string(), out, [&](std::ostream& o) { write_diagram_csv(o, e.diagram); });
                index << e.filter_id << ',' << file << ',' << format_real(e.diagram.cap) << '\n';
            }
            emit((fs::path(cpt_out) / "index.csv").string(), out, [&](std::ostream& o) { o << index.str(); });
            emit((fs::path(cpt_out) / "bank.csv").string(), out, [&](std::ostream& o) { write_bank(o, bank); });
        } else if (*euler) {
            std::vector<double> thresholds = parse_reals(eu_thresholds);
            std::sort(thresholds.begin(), thresholds.end());
            if (!eu_image.empty() && (!eu_bank.empty() || !eu_kind.empty())) {
                const Image f = read_image(eu_image);
                const FilterBank bank = load_bank(eu_bank, eu_kind.empty() ? "random" : eu_kind, eu_count, eu_size,
                                                  f.shape().dim(), f.channels(), eu_opts.seed);
                if (thresholds.empty()) fail(ErrorKind::InvalidArgument, "--thresholds is required with a bank");
                const Stride k(std::vector<std::size_t>(f.shape().dim(), eu_stride));
                const auto curves = cect_image(f, bank, k, thresholds, eu_opts.transform());
                emit(eu_out, out, [&](std::ostream& o) {
                    o << "filter_id,threshold,euler\n";
                    for (const auto& c : curves) {
                        for (std::size_t i = 0; i < c.curve.thresholds.size(); ++i) {
                            o << c.filter_id << ',' << format_real(c.curve.thresholds[i]) << ',' << c.curve.values[i] << '\n';
                        }
                    }
                });
            } else {
                FilteredComplex k;
                if (!eu_image.empty()) {
                    const auto o = eu_opts.transform();
                    Image f = read_image(eu_image);
                    if (o.level == Level::Superlevel) {
                        std::vector<double> neg(f.values().begin(), f.values().end());
                        for (double& v : neg) v = -v;
                        f = Image(f.shape(), f.channels(), std::move(neg));
                    }
                    k = cubical_complex(f, std::min(o.max_dim, f.shape().dim()), o.construction);
                } else {
                    k = skeleton(load_complex(eu_cells, eu_simplices, eu_values, eu_column), eu_opts.max_dim);
                }
                if (thresholds.empty()) thresholds = filtration_values(k);
                const EulerCurve c = euler_curve(k, thresholds);
                emit(eu_out, out, [&](std::ostream& o) {
                    o << "threshold,euler\n";
                    for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
                        o << format_real(c.thresholds[i]) << ',' << c.values[i] << '\n';
                    }
                });
            }
        } else if (*distance) {
            const auto a = load_diagram(dist_a);
            const auto b = load_diagram(dist_b);
            const Ground g = parse_ground(dist_ground);
            double value = 0.0;
            if (dist_metric == "bottleneck") {
                value = bottleneck(a, b, g);
            } else if (dist_metric == "wasserstein") {
                value = wasserstein(a, b, dist_p, g);
            } else {
                const double eps = dist_eps ? *dist_eps : 0.01 * transport_scale(a, b, dist_p, g);
                value = eps > 0.0 ? wasserstein_sinkhorn(a, b, dist_p, eps, 100000, g).value : wasserstein(a, b, dist_p, g);
            }
            out << format_real(value) << '\n';
        } else if (*vectorize) {
            std::vector<Sample> samples;
            for (const auto& p : vec_inputs) samples.push_back(load_sample(p));
            FeaturizeSpec spec;
            spec.method = vec_method == "image" ? Vectorization::PersistenceImage : Vectorization::TotalPersistence;
            spec.mode = vec_combine == "average" ? CombineMode::Average : CombineMode::Concat;
            spec.dims = parse_dims(vec_dims);
            if (spec.method == Vectorization::PersistenceImage) {
                std::vector<const PersistenceDiagram*> all;
                for (const auto& s : samples) {
                    for (const auto& d : s.diagrams) all.push_back(&d);
                }
                spec.image = fit_image_spec(all, spec.dims, vec_pixels, vec_pixels);
            }
            const std::size_t blocks = samples.front().diagrams.size();
            for (const auto& s : samples) {
                if (s.diagrams.size() != blocks) fail(ErrorKind::LengthMismatch, "samples carry different filter counts");
            }
            emit(vec_out, out, [&](std::ostream& o) {
                o << "sample";
                for (const auto& l : feature_labels(samples.front().ids, spec)) o << ',' << l;
                o << '\n';
                for (const auto& s : samples) {
                    std::vector<const PersistenceDiagram*> ds;
                    for (const auto& d : s.diagrams) ds.push_back(&d);
                    o << s.name;
                    for (double v : featurize(ds, spec).values) o << ',' << format_real(v);
                    o << '\n';
                }
            });
        } else if (*filters) {
            FilterBank bank;
            if (fil_kind == "eigen") {
                if (fil_manifest.empty()) fail(ErrorKind::InvalidArgument, "eigen filters need --manifest");
                const auto data = load_dataset(fil_manifest);
                if (data.images.empty()) fail(ErrorKind::DegenerateData, "manifest lists no images");
                const GridShape shape(std::vector<std::size_t>(data.images.front().shape().dim(), fil_size));
                bank = eigenfilters(data.images, shape, fil_components, fil_count, fil_seed);
            } else {
                bank = load_bank("", fil_kind, fil_count, fil_size, 2, fil_channels, fil_seed);
            }
            for (const auto& w : bank.warnings) err << "warning: " << w << '\n';
            emit(fil_out, out, [&](std::ostream& o) { write_bank(o, bank); });
        } else if (*classify) {
            auto in = open_in(cls_config);
            ExperimentConfig config = parse_config(in);
            if (cls_seed) config.master_seed = *cls_seed;
            fs::path dir = config.dataset_dir;
            if (dir.is_relative()) dir = fs::path(cls_config).parent_path() / dir;
            const auto data = load_dataset(dir / "manifest.csv");
            try {
                const auto report = run_experiment(config, data);
                out << report.table();
                if (!cls_json.empty()) emit(cls_json, out, [&](std::ostream& o) { o << report.to_json() << '\n'; });
            } catch (const ExperimentError& e) {
                out << e.partial().table();
                if (!cls_json.empty()) emit(cls_json, out, [&](std::ostream& o) { o << e.partial().to_json() << '\n'; });
                throw;
            }
        } else if (*plot) {
            const auto d = load_diagram(plot_in);
            emit(plot_out, out, [&](std::ostream& o) { o << diagram_svg(d); });
        } else if (*synth) {
            syn.family = syn_family == "blobs" ? SyntheticFamily::Blobs : SyntheticFamily::Stripes;
            write_synthetic(syn, syn_out);
        }
    } catch (const Error& e) {
        err << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error[Internal]: " << e.what() << '\n';
        return 5;
    }
    return 0;
}

}  // namespace convpers::cli
