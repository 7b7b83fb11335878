#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <sstream>

#include "convpers/error.hpp"
#include "convpers/grid.hpp"
#include "convpers/io.hpp"
#include "convpers/learn.hpp"
#include "convpers/metrics.hpp"
#include "convpers/persistence.hpp"
#include "convpers/transforms.hpp"
#include "convpers/vectorize.hpp"

namespace py = pybind11;
using namespace convpers;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridShape shape_of(const py::buffer_info& info) {
    std::vector<std::size_t> extents;
    for (py::ssize_t i = 0; i < info.ndim; ++i) {
        extents.push_back(static_cast<std::size_t>(info.shape[i]));
    }
    return GridShape(extents);
}

Image to_image(const Array& a) {
    const auto info = a.request();
    if (info.ndim < 1) throw py::value_error("image needs at least one axis");
    const auto* data = static_cast<const double*>(info.ptr);
    return Image(shape_of(info), 1, std::vector<double>(data, data + info.size));
}

ConvFilter to_filter(const Array& a) {
    const auto info = a.request();
    const auto* data = static_cast<const double*>(info.ptr);
    return ConvFilter(shape_of(info), 1, std::vector<double>(data, data + info.size));
}

Array from_image(const Image& f) {
    std::vector<py::ssize_t> shape;
    for (std::size_t i = 0; i < f.shape().dim(); ++i) shape.push_back(static_cast<py::ssize_t>(f.shape().extent(i)));
    if (f.channels() > 1) shape.push_back(static_cast<py::ssize_t>(f.channels()));
    Array out(shape);
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

// Diagrams cross the boundary as (n, 3) arrays of (dim, birth, death).
Array from_diagram(const PersistenceDiagram& d) {
    auto points = d.points;
    std::stable_sort(points.begin(), points.end(), diagram_point_less);
    Array out({static_cast<py::ssize_t>(points.size()), py::ssize_t{3}});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < points.size(); ++i) {
        m(i, 0) = static_cast<double>(points[i].dim);
        m(i, 1) = points[i].birth;
        m(i, 2) = points[i].death;
    }
    return out;
}

PersistenceDiagram to_diagram(const Array& a, double cap) {
    const auto info = a.request();
    PersistenceDiagram d;
    d.cap = cap;
    if (info.size == 0) return d;
    if (info.ndim != 2 || info.shape[1] != 3) throw py::value_error("diagram must have shape (n, 3)");
    const auto m = a.unchecked<2>();
    for (py::ssize_t i = 0; i < info.shape[0]; ++i) {
        if (m(i, 0) < 0) throw py::value_error("negative homology dimension");
        const auto dim = static_cast<std::size_t>(m(i, 0));
        d.points.push_back({m(i, 1), m(i, 2), dim});
        d.max_dim = std::max(d.max_dim, dim);
    }
    return d;
}

TransformOptions options(const std::string& construction, std::size_t max_dim, bool superlevel, std::size_t threads) {
    TransformOptions o;
    if (construction == "upper") o.construction = Construction::UpperStar;
    else if (construction == "lower") o.construction = Construction::LowerStar;
    else throw py::value_error("construction must be 'upper' or 'lower'");
    o.max_dim = max_dim;
    o.level = superlevel ? Level::Superlevel : Level::Sublevel;
    o.threads = threads;
    return o;
}

FilterBank make_bank(const py::object& filters, std::size_t dim) {
    if (py::isinstance<py::str>(filters)) {
        const auto kind = filters.cast<std::string>();
        if (kind == "trivial") return trivial_filter(dim);
        if (kind == "standard") return standard_filters();
        throw py::value_error("bank name must be 'trivial' or 'standard'");
    }
    FilterBank bank;
    for (const auto& g : filters) bank.filters.push_back(to_filter(g.cast<Array>()));
    return bank;
}

Stride make_stride(const py::object& stride, std::size_t dim) {
    if (stride.is_none()) return Stride::unit(dim);
    if (py::isinstance<py::int_>(stride)) return Stride(std::vector<std::size_t>(dim, stride.cast<std::size_t>()));
    return Stride(stride.cast<std::vector<std::size_t>>());
}

}  // namespace

PYBIND11_MODULE(_convpers, m) {
    m.doc() = "Convolutional persistence: filter banks, persistent homology, diagram metrics.";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
            PyErr_SetString(PyExc_ValueError, msg.c_str());
        }
    });

    m.def(
        "region_shape",
        [](std::vector<std::size_t> p, std::vector<std::size_t> b, std::vector<std::size_t> k) {
            const auto r = region_shape(GridShape(p), GridShape(b), Stride(k));
            std::vector<std::size_t> out;
            for (std::size_t i = 0; i < r.dim(); ++i) out.push_back(r.extent(i));
            return py::tuple(py::cast(out));
        },
        py::arg("image_shape"), py::arg("filter_shape"), py::arg("stride"));

    m.def(
        "convolve",
        [](const Array& f, const Array& g, const py::object& stride) {
            const Image img = to_image(f);
            return from_image(convolve(img, to_filter(g), make_stride(stride, img.shape().dim())));
        },
        py::arg("image"), py::arg("filter"), py::arg("stride") = py::none());

    m.def(
        "diagram",
        [](const Array& f, const std::string& construction, std::size_t max_dim, bool superlevel) {
            return from_diagram(image_persistence(to_image(f), options(construction, max_dim, superlevel, 1)));
        },
        py::arg("image"), py::arg("construction") = "upper", py::arg("max_dim") = 2, py::arg("superlevel") = false);

    m.def(
        "cpt",
        [](const Array& f, const py::object& filters, const py::object& stride, const std::string& construction,
           std::size_t max_dim, bool superlevel, std::size_t threads) {
            const Image img = to_image(f);
            const auto bank = make_bank(filters, img.shape().dim());
            const auto r = cpt_image(img, bank, make_stride(stride, img.shape().dim()),
                                     options(construction, max_dim, superlevel, threads));
            py::list out;
            for (const auto& e : r.entries) out.append(from_diagram(e.diagram));
            return out;
        },
        py::arg("image"), py::arg("filters"), py::arg("stride") = py::none(), py::arg("construction") = "upper",
        py::arg("max_dim") = 2, py::arg("superlevel") = false, py::arg("threads") = 0);

    m.def(
        "random_filters",
        [](std::vector<std::size_t> shape, std::size_t count, std::uint64_t seed) {
            py::list out;
            for (const auto& g : random_filters(GridShape(shape), 1, count, seed).filters) {
                Array a(std::vector<py::ssize_t>(shape.begin(), shape.end()));
                std::copy(g.values().begin(), g.values().end(), a.mutable_data());
                out.append(a);
            }
            return out;
        },
        py::arg("shape"), py::arg("count"), py::arg("seed") = 0);

    m.def(
        "bottleneck", [](const Array& a, const Array& b) { return bottleneck(to_diagram(a, 0), to_diagram(b, 0)); },
        py::arg("a"), py::arg("b"));
    m.def(
        "wasserstein",
        [](const Array& a, const Array& b, double p) { return wasserstein(to_diagram(a, 0), to_diagram(b, 0), p); },
        py::arg("a"), py::arg("b"), py::arg("p") = 2.0);
    m.def(
        "sinkhorn",
        [](const Array& a, const Array& b, double p, std::optional<double> epsilon) {
            const auto da = to_diagram(a, 0), db = to_diagram(b, 0);
            const double eps = epsilon ? *epsilon : 0.01 * transport_scale(da, db, p);
            if (!(eps > 0.0)) return wasserstein(da, db, p);
            return wasserstein_sinkhorn(da, db, p, eps).value;
        },
        py::arg("a"), py::arg("b"), py::arg("p") = 2.0, py::arg("epsilon") = py::none());

    m.def(
        "total_persistence",
        [](const Array& d, std::size_t dim, double cap) { return total_persistence(to_diagram(d, cap), dim); },
        py::arg("diagram"), py::arg("dim"), py::arg("cap") = 0.0);

    m.def(
        "persistence_image",
        [](const Array& d, std::size_t dim, std::pair<double, double> birth_range, std::pair<double, double> pers_range,
           double sigma, std::size_t pixels) {
            PersistenceImageSpec spec;
            spec.birth_pixels = spec.pers_pixels = pixels;
            spec.sigma = sigma;
            spec.bounds = {birth_range.first, birth_range.second, pers_range.first, pers_range.second};
            const auto v = persistence_image(to_diagram(d, 0), dim, spec);
            Array out({static_cast<py::ssize_t>(pixels), static_cast<py::ssize_t>(pixels)});
            std::copy(v.begin(), v.end(), out.mutable_data());
            return out;
        },
        py::arg("diagram"), py::arg("dim"), py::arg("birth_range"), py::arg("pers_range"), py::arg("sigma"),
        py::arg("pixels") = 10);

    m.def(
        "euler_curve",
        [](const Array& f, std::vector<double> thresholds, const std::string& construction, std::size_t max_dim) {
            const Image img = to_image(f);
            const auto o = options(construction, max_dim, false, 1);
            const auto k = cubical_complex(img, std::min(max_dim, img.shape().dim()), o.construction);
            std::sort(thresholds.begin(), thresholds.end());
            return euler_curve(k, thresholds).values;
        },
        py::arg("image"), py::arg("thresholds"), py::arg("construction") = "upper", py::arg("max_dim") = 2);

    m.def(
        "synthetic",
        [](const std::string& family, std::size_t size, std::size_t count, double noise, std::uint64_t seed) {
            SyntheticSpec spec;
            if (family == "stripes") spec.family = SyntheticFamily::Stripes;
            else if (family == "blobs") spec.family = SyntheticFamily::Blobs;
            else throw py::value_error("family must be 'stripes' or 'blobs'");
            spec.size = size;
            spec.count = count;
            spec.noise = noise;
            spec.seed = seed;
            const auto data = generate_synthetic(spec);
            py::list images;
            for (const auto& f : data.images) images.append(from_image(f));
            return py::make_tuple(images, data.labels, data.class_names);
        },
        py::arg("family") = "stripes", py::arg("size") = 12, py::arg("count") = 100, py::arg("noise") = 0.15,
        py::arg("seed") = 0);

    m.def(
        "classify",
        [](const std::string& config_text, const std::string& manifest) {
            std::istringstream in(config_text);
            const auto config = parse_config(in);
            const auto report = run_experiment(config, load_dataset(manifest));
            return report.to_json();
        },
        py::arg("config"), py::arg("manifest"),
        "Runs the kNN experiment described by a key = value config; returns the JSON report.");
}
