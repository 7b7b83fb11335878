#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "convpers/complex.hpp"
#include "convpers/grid.hpp"
#include "convpers/learn.hpp"
#include "convpers/linalg.hpp"
#include "convpers/persistence.hpp"
#include "convpers/transforms.hpp"

namespace convpers {

/// PGM (P2 or P5, scaled to [0,1] by maxval) or a CSV matrix (verbatim).
/// The format is sniffed from the magic number, then the extension.
Image read_image(const std::filesystem::path& path);
Image parse_pgm(std::istream& in);
Image parse_csv_matrix(std::istream& in);

/// Binary P5 with maxval 255; values are clamped to [0,1] first.
void write_pgm(const std::filesystem::path& path, const Image& image);
void write_csv_matrix(std::ostream& out, const Image& image);

struct ManifestRow {
    std::string path;  // relative to the manifest's directory
    std::string label;
};

/// CSV with header `path,label`.
std::vector<ManifestRow> read_manifest(std::istream& in);
void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows);

/// Loads every image of a manifest. Class ids follow sorted label order.
LabeledImages load_dataset(const std::filesystem::path& manifest);

enum class SyntheticFamily {
    Stripes,  // classes: horizontal, vertical, diagonal stripes
    Blobs,    // classes: 1, 2, 3 bright blobs
};

struct SyntheticSpec {
    SyntheticFamily family = SyntheticFamily::Stripes;
    std::size_t size = 12;
    std::size_t count = 100;  // per class
    double noise = 0.15;
    std::uint64_t seed = 0;

    void validate() const;
};

LabeledImages generate_synthetic(const SyntheticSpec& spec);

/// Writes <dir>/<class>_<index>.pgm and <dir>/manifest.csv.
void write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

/// CSV `id,shape,channels,values...` preceded by a `# provenance=...` line.
void write_bank(std::ostream& out, const FilterBank& bank);
FilterBank read_bank(std::istream& in);

/// Whitespace-separated vertex ids, one simplex per line.
std::vector<std::vector<std::size_t>> read_simplices(std::istream& in);

/// Rows `vertex_id,v1,...,vd` (optional header); returns an n×d matrix
/// indexed by vertex id.
Matrix read_vertex_values(std::istream& in);

/// Explicit complex: header `dim,value,faces`, faces given as space-separated
/// 0-based row numbers of earlier or later rows. Row number becomes the id.
FilteredComplex read_cells(std::istream& in);

/// Scatter plot of (birth, death) with the diagonal; essential points sit on
/// a dashed line above the finite range.
std::string diagram_svg(const PersistenceDiagram& diagram);

/// Reads a whole file; throws IOError.
std::string read_file(const std::filesystem::path& path);

}  // namespace convpers
