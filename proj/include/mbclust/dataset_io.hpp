#pragma once

#include "mbclust/covariance.hpp"
#include "mbclust/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mbclust {

struct Dataset {
    Matrix data;
    std::optional<LabelVector> labels;
    std::vector<std::string> header;  // empty when the file had none
};

/// Reads comma-separated numeric rows. A first row with any non-numeric
/// cell is treated as a header. With `has_labels`, the last column must hold
/// integers and becomes the label vector. Throws ParseError with the 1-based
/// line and column of the first bad cell.
Dataset load_dataset(const std::filesystem::path& path, bool has_labels);
Dataset parse_dataset(std::istream& in, bool has_labels);

/// Writes `data` (and labels as a trailing "label" column) with a header
/// row x1..xd, using round-trip precision.
void write_dataset(std::ostream& out, const Matrix& data, const LabelVector* labels = nullptr);
void write_dataset(const std::filesystem::path& path, const Matrix& data, const LabelVector* labels = nullptr);

/// Z-score each column; constant columns are only centered.
Matrix standardize(const Matrix& data);

/// Per-class means, one row per distinct label in ascending label order.
/// nullopt when the label count does not match the rows.
std::optional<Matrix> class_centers(const Matrix& data, const LabelVector& labels);

}  // namespace mbclust
