#ifndef KERRBORN_IO_HPP
#define KERRBORN_IO_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "kerrborn/grid.hpp"

namespace kerrborn {

/// Serializes with 17 significant digits so values round-trip exactly.
std::string format_double(double v);

/// Node-function snapshot: node index, coordinates, value.
void write_field_csv(const std::filesystem::path& path, const Grid& grid,
                     const Eigen::VectorXd& field);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, int skip_header = 1);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace kerrborn

#endif
