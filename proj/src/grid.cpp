#include "convpers/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "convpers/error.hpp"

namespace convpers {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        fail(ErrorKind::DimMismatch, std::string(what) + ": dimension " + std::to_string(a) +
                                         " vs " + std::to_string(b));
    }
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, std::string(what) + " has non-finite values");
    }
}

// Offsets (in P's flat layout) of every point of B translated to the origin.
std::vector<std::size_t> filter_offsets(const GridShape& p, const GridShape& b) {
    const auto strides = p.axis_strides();
    std::vector<std::size_t> offsets(b.size());
    std::vector<std::size_t> coord(b.dim(), 0);
    for (std::size_t idx = 0; idx < b.size(); ++idx) {
        std::size_t off = 0;
        for (std::size_t a = 0; a < b.dim(); ++a) off += coord[a] * strides[a];
        offsets[idx] = off;
        for (std::size_t a = b.dim(); a-- > 0;) {
            if (++coord[a] < b.extent(a)) break;
            coord[a] = 0;
        }
    }
    return offsets;
}

// Flat P-offset of the anchor of each translate, in R's row-major order.
std::vector<std::size_t> anchor_offsets(const GridShape& p, const GridShape& r, const Stride& k) {
    const auto strides = p.axis_strides();
    std::vector<std::size_t> anchors(r.size());
    std::vector<std::size_t> coord(r.dim(), 0);
    for (std::size_t idx = 0; idx < r.size(); ++idx) {
        std::size_t off = 0;
        for (std::size_t a = 0; a < r.dim(); ++a) off += coord[a] * k[a] * strides[a];
        anchors[idx] = off;
        for (std::size_t a = r.dim(); a-- > 0;) {
            if (++coord[a] < r.extent(a)) break;
            coord[a] = 0;
        }
    }
    return anchors;
}

}  // namespace

GridShape::GridShape(std::vector<std::size_t> extents) : extents_(std::move(extents)) {
    if (extents_.empty()) fail(ErrorKind::InvalidArgument, "grid shape needs at least one axis");
    size_ = 1;
    for (std::size_t e : extents_) {
        if (e == 0) fail(ErrorKind::InvalidArgument, "grid extents must be positive");
        size_ *= e;
    }
}

std::size_t GridShape::flatten(std::span<const std::size_t> coord) const {
    require_same_dim(coord.size(), dim(), "flatten");
    std::size_t index = 0;
    for (std::size_t a = 0; a < dim(); ++a) index = index * extents_[a] + coord[a];
    return index;
}

std::vector<std::size_t> GridShape::unflatten(std::size_t index) const {
    std::vector<std::size_t> coord(dim());
    for (std::size_t a = dim(); a-- > 0;) {
        coord[a] = index % extents_[a];
        index /= extents_[a];
    }
    return coord;
}

std::vector<std::size_t> GridShape::axis_strides() const {
    std::vector<std::size_t> s(dim(), 1);
    for (std::size_t a = dim(); a-- > 1;) s[a - 1] = s[a] * extents_[a];
    return s;
}

std::string GridShape::to_string() const {
    std::string out;
    for (std::size_t a = 0; a < dim(); ++a) {
        if (a) out += 'x';
        out += std::to_string(extents_[a]);
    }
    return out;
}

GridShape GridShape::parse(const std::string& text) {
    std::vector<std::size_t> extents;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        try {
            std::size_t used = 0;
            long long v = std::stoll(part, &used);
            if (used != part.size() || v <= 0) throw std::invalid_argument(part);
            extents.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidArgument, "bad grid shape '" + text + "'");
        }
    }
    return GridShape(std::move(extents));
}

Stride::Stride(std::vector<std::size_t> k) : k_(std::move(k)) {
    if (k_.empty()) fail(ErrorKind::InvalidArgument, "stride needs at least one axis");
    for (std::size_t v : k_) {
        if (v == 0) fail(ErrorKind::InvalidArgument, "stride entries must be >= 1");
    }
}

std::size_t Stride::kappa() const noexcept {
    std::size_t prod = 1;
    for (std::size_t v : k_) prod *= v;
    return prod;
}

Image::Image(GridShape shape, std::size_t channels, std::vector<double> values)
    : shape_(std::move(shape)), channels_(channels), values_(std::move(values)) {
    if (channels_ == 0) fail(ErrorKind::InvalidArgument, "image needs at least one channel");
    if (values_.size() != shape_.size() * channels_) {
        fail(ErrorKind::LengthMismatch, "image values length " + std::to_string(values_.size()) +
                                            " does not match shape " + shape_.to_string() + " x " +
                                            std::to_string(channels_) + " channels");
    }
    require_finite(values_, "image");
}

Image Image::zeros(GridShape shape, std::size_t channels) {
    const std::size_t n = shape.size() * channels;
    return Image(std::move(shape), channels, std::vector<double>(n, 0.0));
}

Image Image::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) fail(ErrorKind::InvalidArgument, "empty image");
    std::vector<double> values;
    for (const auto& row : rows) {
        if (row.size() != rows.front().size()) fail(ErrorKind::ShapeMismatch, "ragged image rows");
        values.insert(values.end(), row.begin(), row.end());
    }
    return Image(GridShape{rows.size(), rows.front().size()}, 1, std::move(values));
}

ConvFilter::ConvFilter(GridShape shape, std::size_t channels, std::vector<double> values,
                       std::string id)
    : shape_(std::move(shape)), channels_(channels), values_(std::move(values)), id_(std::move(id)) {
    if (channels_ == 0) fail(ErrorKind::InvalidArgument, "filter needs at least one channel");
    if (values_.size() != shape_.size() * channels_) {
        fail(ErrorKind::LengthMismatch, "filter values length does not match shape " + shape_.to_string());
    }
    require_finite(values_, "filter");
}

ConvFilter ConvFilter::from_rows(const std::vector<std::vector<double>>& rows, std::string id) {
    Image tmp = Image::from_rows(rows);
    return ConvFilter(tmp.shape(), 1, std::vector<double>(tmp.values().begin(), tmp.values().end()),
                      std::move(id));
}

double ConvFilter::l1_norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += std::abs(v);
    return s;
}

double ConvFilter::l2_norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

double ConvFilter::linf_norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
}

GridShape region_shape(const GridShape& p, const GridShape& b, const Stride& k) {
    require_same_dim(b.dim(), p.dim(), "region_shape filter");
    require_same_dim(k.dim(), p.dim(), "region_shape stride");
    std::vector<std::size_t> out(p.dim());
    for (std::size_t a = 0; a < p.dim(); ++a) {
        if (b.extent(a) > p.extent(a)) {
            fail(ErrorKind::EmptyRegion, "filter " + b.to_string() + " does not fit inside " +
                                             p.to_string());
        }
        out[a] = (p.extent(a) - b.extent(a)) / k[a] + 1;
    }
    return GridShape(std::move(out));
}

Image convolve(const Image& f, const ConvFilter& g, const Stride& k) {
    if (f.channels() != g.channels()) {
        fail(ErrorKind::ChannelMismatch, "image has " + std::to_string(f.channels()) +
                                             " channels, filter has " + std::to_string(g.channels()));
    }
    const GridShape r = region_shape(f.shape(), g.shape(), k);
    const auto taps = filter_offsets(f.shape(), g.shape());
    const auto anchors = anchor_offsets(f.shape(), r, k);
    const std::size_t n = f.channels();
    const auto fv = f.values();
    const auto gv = g.values();

    std::vector<double> out(r.size());
    for (std::size_t v = 0; v < r.size(); ++v) {
        double acc = 0.0;
        for (std::size_t t = 0; t < taps.size(); ++t) {
            const double* fp = fv.data() + (anchors[v] + taps[t]) * n;
            const double* gp = gv.data() + t * n;
            for (std::size_t c = 0; c < n; ++c) acc += gp[c] * fp[c];
        }
        out[v] = acc;
    }
    return Image(r, 1, std::move(out));
}

ConvFilter linear_combination(std::span<const ConvFilter> filters, std::span<const double> coeffs) {
    if (filters.empty()) fail(ErrorKind::InvalidArgument, "linear_combination of no filters");
    if (filters.size() != coeffs.size()) {
        fail(ErrorKind::LengthMismatch, "filters and coefficients differ in length");
    }
    const ConvFilter& first = filters.front();
    std::vector<double> values(first.values().size(), 0.0);
    for (std::size_t i = 0; i < filters.size(); ++i) {
        const ConvFilter& g = filters[i];
        if (g.shape() != first.shape() || g.channels() != first.channels()) {
            fail(ErrorKind::ShapeMismatch, "linear_combination needs filters of identical shape");
        }
        for (std::size_t j = 0; j < values.size(); ++j) values[j] += coeffs[i] * g.values()[j];
    }
    return ConvFilter(first.shape(), first.channels(), std::move(values), first.id());
}

std::vector<std::vector<double>> extract_patches(const Image& f, const GridShape& b, const Stride& k) {
    const GridShape r = region_shape(f.shape(), b, k);
    const auto taps = filter_offsets(f.shape(), b);
    const auto anchors = anchor_offsets(f.shape(), r, k);
    const std::size_t n = f.channels();
    const auto fv = f.values();

    std::vector<std::vector<double>> patches(r.size());
    for (std::size_t v = 0; v < r.size(); ++v) {
        auto& patch = patches[v];
        patch.reserve(taps.size() * n);
        for (std::size_t tap : taps) {
            for (std::size_t c = 0; c < n; ++c) patch.push_back(fv[(anchors[v] + tap) * n + c]);
        }
    }
    return patches;
}

Image max_pool(const Image& f, const GridShape& window) {
    const Stride k(window.extents());
    const GridShape r = region_shape(f.shape(), window, k);
    const auto taps = filter_offsets(f.shape(), window);
    const auto anchors = anchor_offsets(f.shape(), r, k);
    const std::size_t n = f.channels();

    std::vector<double> out(r.size() * n, -std::numeric_limits<double>::infinity());
    for (std::size_t v = 0; v < r.size(); ++v) {
        for (std::size_t tap : taps) {
            for (std::size_t c = 0; c < n; ++c) {
                out[v * n + c] = std::max(out[v * n + c], f.at(anchors[v] + tap, c));
            }
        }
    }
    return Image(r, n, std::move(out));
}

}  // namespace convpers
