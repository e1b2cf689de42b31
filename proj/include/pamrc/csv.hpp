#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pamrc {

// Deterministic CSV output: every double is printed with 15 significant
// digits via the same snprintf path, so identical runs give identical bytes.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void write_row(const std::vector<double>& values);
    void write_row(const std::vector<std::string>& cells);
    void write_cells_then_values(const std::vector<std::string>& cells,
                                 const std::vector<double>& values);

    static std::string format_value(double v);

private:
    std::ofstream out_;
    std::size_t columns_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(const std::string& name) const;  // throws if absent
    std::vector<double> column(const std::string& name) const;
    Eigen::MatrixXd to_matrix() const;
};

CsvTable read_csv(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const Eigen::MatrixXd& m);

}  // namespace pamrc
