#pragma once

#include "stagewise/problem.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace stagewise {

/// Response selected by header name or zero-based column index.
using ResponseColumn = std::variant<std::string, std::size_t>;

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header entry; throws MissingResponseColumn if absent.
  std::size_t column(const std::string& name) const;
};

/// Parses a numeric CSV. Every data cell must parse completely as a finite
/// double; otherwise ParseError naming the 1-based line and column.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

RawDataset load_csv(const std::filesystem::path& path, const ResponseColumn& response);
RawDataset to_dataset(const CsvTable& table, const ResponseColumn& response);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string to_csv_string(const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows);

/// Writes a matrix with header prefix0, prefix1, ...
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::string& prefix);

}  // namespace stagewise
