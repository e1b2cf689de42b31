#include "pamrc/csv.hpp"

#include <cstdio>
#include <sstream>

#include "pamrc/errors.hpp"

namespace pamrc {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) {
        throw ConfigError("cannot open CSV for writing: " + path.string());
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        out_ << (i ? "," : "") << header[i];
    }
    out_ << "\n";
}

std::string CsvWriter::format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

void CsvWriter::write_row(const std::vector<double>& values) {
    if (values.size() != columns_) {
        throw NumericalError("CSV row width mismatch");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        out_ << (i ? "," : "") << format_value(values[i]);
    }
    out_ << "\n";
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) {
        throw NumericalError("CSV row width mismatch");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out_ << (i ? "," : "") << cells[i];
    }
    out_ << "\n";
}

void CsvWriter::write_cells_then_values(const std::vector<std::string>& cells,
                                        const std::vector<double>& values) {
    if (cells.size() + values.size() != columns_) {
        throw NumericalError("CSV row width mismatch");
    }
    bool first = true;
    for (const auto& c : cells) {
        out_ << (first ? "" : ",") << c;
        first = false;
    }
    for (double v : values) {
        out_ << (first ? "" : ",") << format_value(v);
        first = false;
    }
    out_ << "\n";
}

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ConfigError("CSV column not found: " + name);
}

std::vector<double> CsvTable::column(const std::string& name) const {
    std::size_t j = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(j));
    return out;
}

Eigen::MatrixXd CsvTable::to_matrix() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(header.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return m;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open CSV for reading: " + path.string());
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("empty CSV: " + path.string());
    }
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(table.header.size());
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != table.header.size()) {
            throw ConfigError("ragged CSV row in " + path.string());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_matrix_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const Eigen::MatrixXd& m) {
    CsvWriter w(path, header);
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row[static_cast<std::size_t>(j)] = m(i, j);
        }
        w.write_row(row);
    }
}

}  // namespace pamrc
