#include "kerrborn/io.hpp"

#include <fstream>
#include <sstream>

#include "kerrborn/errors.hpp"

namespace kerrborn {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void write_field_csv(const std::filesystem::path& path, const Grid& grid,
                     const Eigen::VectorXd& field) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << "node";
    for (int d = 0; d < grid.dimension; ++d) out << ",x" << d;
    out << ",value\n";
    for (int i = 0; i < grid.num_nodes(); ++i) {
        out << i;
        for (int d = 0; d < grid.dimension; ++d) out << "," << format_double(grid.nodes(i, d));
        out << "," << format_double(field(i)) << "\n";
    }
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, int skip_header) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        if (line_no++ < skip_header) continue;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("malformed numeric cell in " + path.string() + ": " + cell);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError("ragged CSV rows in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << content;
}

}  // namespace kerrborn
