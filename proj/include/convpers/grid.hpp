#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace convpers {

/// Extents of an origin-anchored rectangle in Z^d. Axis 0 varies slowest
/// (row-major), so a 2D shape is (rows, cols).
class GridShape {
public:
    GridShape() = default;
    explicit GridShape(std::vector<std::size_t> extents);
    GridShape(std::initializer_list<std::size_t> extents)
        : GridShape(std::vector<std::size_t>(extents)) {}

    std::size_t dim() const noexcept { return extents_.size(); }
    std::size_t extent(std::size_t axis) const { return extents_.at(axis); }
    const std::vector<std::size_t>& extents() const noexcept { return extents_; }

    /// Number of lattice points.
    std::size_t size() const noexcept { return size_; }

    /// Row-major linear index of a coordinate tuple.
    std::size_t flatten(std::span<const std::size_t> coord) const;
    /// Inverse of flatten.
    std::vector<std::size_t> unflatten(std::size_t index) const;
    /// Linear offset of a unit step along each axis.
    std::vector<std::size_t> axis_strides() const;

    std::string to_string() const;  // "4x3"
    static GridShape parse(const std::string& text);

    friend bool operator==(const GridShape&, const GridShape&) = default;

private:
    std::vector<std::size_t> extents_;
    std::size_t size_ = 0;
};

class Stride {
public:
    Stride() = default;
    explicit Stride(std::vector<std::size_t> k);
    Stride(std::initializer_list<std::size_t> k) : Stride(std::vector<std::size_t>(k)) {}

    static Stride unit(std::size_t dim) { return Stride(std::vector<std::size_t>(dim, 1)); }

    std::size_t dim() const noexcept { return k_.size(); }
    std::size_t operator[](std::size_t axis) const { return k_.at(axis); }
    const std::vector<std::size_t>& values() const noexcept { return k_; }

    /// Downsampling factor: product of the per-axis strides.
    std::size_t kappa() const noexcept;

    friend bool operator==(const Stride&, const Stride&) = default;

private:
    std::vector<std::size_t> k_;
};

/// An n-channel real function on a rectangle. Values are stored point-major:
/// values[point * channels + channel].
class Image {
public:
    Image() = default;
    Image(GridShape shape, std::size_t channels, std::vector<double> values);

    static Image zeros(GridShape shape, std::size_t channels = 1);
    /// Single-channel 2D image from nested rows.
    static Image from_rows(const std::vector<std::vector<double>>& rows);

    const GridShape& shape() const noexcept { return shape_; }
    std::size_t channels() const noexcept { return channels_; }
    std::span<const double> values() const noexcept { return values_; }

    double at(std::size_t point, std::size_t channel = 0) const {
        return values_[point * channels_ + channel];
    }
    double& at(std::size_t point, std::size_t channel = 0) {
        return values_[point * channels_ + channel];
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    GridShape shape_;
    std::size_t channels_ = 0;
    std::vector<double> values_;
};

/// A filter (B, g) with the same layout as Image, plus a label.
class ConvFilter {
public:
    ConvFilter() = default;
    ConvFilter(GridShape shape, std::size_t channels, std::vector<double> values,
               std::string id = {});

    static ConvFilter from_rows(const std::vector<std::vector<double>>& rows,
                                std::string id = {});

    const GridShape& shape() const noexcept { return shape_; }
    std::size_t channels() const noexcept { return channels_; }
    std::span<const double> values() const noexcept { return values_; }
    const std::string& id() const noexcept { return id_; }
    void set_id(std::string id) { id_ = std::move(id); }

    double l1_norm() const noexcept;
    double l2_norm() const noexcept;
    double linf_norm() const noexcept;

    friend bool operator==(const ConvFilter&, const ConvFilter&) = default;

private:
    GridShape shape_;
    std::size_t channels_ = 0;
    std::vector<double> values_;
    std::string id_;
};

/// Lattice R of offsets r with B + (r ⊙ k) ⊆ P.
GridShape region_shape(const GridShape& p, const GridShape& b, const Stride& k);

/// Valid strided convolution (correlation form, no flipping):
/// out[v] = Σ_{p∈B} g(p)·f(p + v⊙k), summed lexicographically over B then channel.
Image convolve(const Image& f, const ConvFilter& g, const Stride& k);

ConvFilter linear_combination(std::span<const ConvFilter> filters,
                              std::span<const double> coeffs);

/// One vector of length |B|·n per point of R (in R's row-major order), holding
/// f restricted to the translate B + k⊙r.
std::vector<std::vector<double>> extract_patches(const Image& f, const GridShape& b,
                                                 const Stride& k);

/// Non-overlapping max pooling with the given window (trailing partial
/// windows are dropped). Applied per channel.
Image max_pool(const Image& f, const GridShape& window);

}  // namespace convpers
