#include "mbclust/dataset_io.hpp"

#include "mbclust/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace mbclust {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

std::optional<double> to_number(std::string_view cell) {
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

Dataset parse_dataset(std::istream& in, bool has_labels) {
    Dataset out;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first_content = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);

        if (first_content) {
            first_content = false;
            bool numeric = true;
            for (const auto cell : cells) numeric = numeric && to_number(cell).has_value();
            if (!numeric) {
                for (const auto cell : cells) out.header.emplace_back(cell);
                width = cells.size();
                continue;
            }
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width) {
            throw ParseError("expected " + std::to_string(width) + " columns, found " + std::to_string(cells.size()),
                             line_no, std::min(cells.size(), width) + 1);
        }

        std::vector<double> values;
        values.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto value = to_number(cells[c]);
            if (!value) throw ParseError("non-numeric cell '" + std::string(cells[c]) + "'", line_no, c + 1);
            values.push_back(*value);
        }
        if (has_labels) {
            const double label = values.back();
            if (label != std::floor(label) || label < 0.0 || label > std::numeric_limits<int>::max()) {
                throw ParseError("label must be a nonnegative integer", line_no, cells.size());
            }
            labels.push_back(static_cast<int>(label));
            values.pop_back();
        }
        rows.push_back(std::move(values));
    }

    if (rows.empty()) throw ParseError("dataset has no data rows");
    const std::size_t features = rows.front().size();
    if (features == 0) throw ParseError("dataset has no feature columns");

    out.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(features));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < features; ++j) out.data(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    if (has_labels) out.labels = std::move(labels);
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, bool has_labels) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
    return parse_dataset(in, has_labels);
}

void write_dataset(std::ostream& out, const Matrix& data, const LabelVector* labels) {
    if (labels != nullptr && static_cast<Index>(labels->size()) != data.rows()) {
        throw InvalidParameter("write_dataset: label count does not match rows");
    }
    for (Index j = 0; j < data.cols(); ++j) out << (j > 0 ? "," : "") << 'x' << (j + 1);
    if (labels != nullptr) out << ",label";
    out << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index j = 0; j < data.cols(); ++j) out << (j > 0 ? "," : "") << data(i, j);
        if (labels != nullptr) out << ',' << (*labels)[static_cast<std::size_t>(i)];
        out << '\n';
    }
}

void write_dataset(const std::filesystem::path& path, const Matrix& data, const LabelVector* labels) {
    std::ofstream out(path);
    if (!out) throw InvalidParameter("cannot write '" + path.string() + "'");
    write_dataset(out, data, labels);
}

Matrix standardize(const Matrix& data) {
    const Vector mean = data.colwise().mean().transpose();
    Matrix out = data.rowwise() - mean.transpose();
    for (Index j = 0; j < out.cols(); ++j) {
        const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(out.rows()));
        if (sd > 0.0) out.col(j) /= sd;
    }
    return out;
}

std::optional<Matrix> class_centers(const Matrix& data, const LabelVector& labels) {
    if (static_cast<Index>(labels.size()) != data.rows() || labels.empty()) return std::nullopt;
    std::map<int, std::pair<Vector, Index>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = groups.try_emplace(labels[i], Vector::Zero(data.cols()), 0);
        it->second.first += data.row(static_cast<Index>(i)).transpose();
        ++it->second.second;
    }
    Matrix centers(static_cast<Index>(groups.size()), data.cols());
    Index row = 0;
    for (const auto& [label, acc] : groups) centers.row(row++) = (acc.first / static_cast<double>(acc.second)).transpose();
    return centers;
}

}  // namespace mbclust
