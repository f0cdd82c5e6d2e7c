#include "stagewise/csv_io.hpp"

#include "stagewise/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stagewise {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  std::string out = s.substr(first, last - first + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::string location(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw Error(ErrorCode::MissingResponseColumn, "no column named '" + name + "'");
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (!have_header) {
      for (auto& f : fields) table.header.push_back(trim(f));
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError, location(source, line_no, fields.size()) + ": expected " +
                                             std::to_string(table.header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string cell = trim(fields[j]);
      double value = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      if (!cell.empty() && *begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError,
                    location(source, line_no, j + 1) + ": cannot parse '" + cell + "' as a finite number");
      }
      row[j] = value;
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::ParseError, source + ": missing header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path.string());
}

RawDataset to_dataset(const CsvTable& table, const ResponseColumn& response) {
  std::size_t response_index = 0;
  if (const auto* name = std::get_if<std::string>(&response)) {
    response_index = table.column(*name);
  } else {
    response_index = std::get<std::size_t>(response);
    if (response_index >= table.header.size()) {
      throw Error(ErrorCode::MissingResponseColumn,
                  "response index " + std::to_string(response_index) + " out of range");
    }
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto p = static_cast<Eigen::Index>(table.header.size()) - 1;
  RawDataset raw;
  raw.X.resize(n, p);
  raw.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j == response_index) {
        raw.y(i) = row[j];
      } else {
        raw.X(i, c++) = row[j];
      }
    }
  }
  return raw;
}

RawDataset load_csv(const std::filesystem::path& path, const ResponseColumn& response) {
  return to_dataset(read_csv(path), response);
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw Error(ErrorCode::Io, "float formatting failed");
  return std::string(buffer, ptr);
}

std::string to_csv_string(const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += header[j];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_csv_string(header, rows);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::string& prefix) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    header.push_back(m.cols() == 1 ? prefix : prefix + std::to_string(j));
  }
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    r.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
  }
  write_csv(path, header, rows);
}

}  // namespace stagewise
