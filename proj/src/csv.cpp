#include "nnfac/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nnfac/errors.hpp"

namespace nnfac {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& raw, const std::string& path,
                    long line) {
  const char* begin = raw.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0') || errno == ERANGE) {
    throw ParseError(path, line, "expected a decimal literal, got '" + raw + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(path, line, "non-finite value '" + raw + "'");
  }
  return value;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path, 0, "cannot open file");
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // Ignore trailing blank lines only.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Matrix load_matrix_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) {
    throw ParseError(path, 1, "empty matrix file");
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const long lineno = static_cast<long>(i) + 1;
    if (lines[i].empty()) {
      throw ParseError(path, lineno, "blank line inside matrix");
    }
    const auto fields = split_fields(lines[i]);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, path, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path, lineno,
                       "row has " + std::to_string(row.size()) +
                           " fields, expected " +
                           std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void save_matrix_csv(const std::string& path, const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

Vector load_column_csv(const std::string& path) {
  const Matrix m = load_matrix_csv(path);
  if (m.cols() != 1) {
    throw ParseError(path, 1, "expected a single column");
  }
  return m.col(0);
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> load_index_pairs_csv(
    const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const long lineno = static_cast<long>(i) + 1;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 2) {
      throw ParseError(path, lineno, "expected 'row,col'");
    }
    long vals[2];
    for (int k = 0; k < 2; ++k) {
      const auto& f = fields[static_cast<std::size_t>(k)];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vals[k]);
      if (ec != std::errc() || ptr != f.data() + f.size() || vals[k] < 0) {
        throw ParseError(path, lineno,
                         "expected a nonnegative integer, got '" + f + "'");
      }
    }
    pairs.emplace_back(vals[0], vals[1]);
  }
  return pairs;
}

void write_text_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open '" + tmp.string() +
                               "' for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, target);
}

}  // namespace nnfac
