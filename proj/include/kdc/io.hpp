#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdc/assoc.hpp"
#include "kdc/studies.hpp"
#include "kdc/types.hpp"

namespace kdc {

struct CsvMatrix {
  std::vector<std::string> header;
  Matrix values;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t')) --b;
  return s.substr(a, b - a);
}

inline double parse_cell(const std::string& raw, std::size_t line,
                         std::size_t column) {
  const std::string cell = trim(raw);
  if (cell.empty()) throw ParseError("empty cell", line, column);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("cell '" + cell + "' is not numeric", line, column);
  return value;
}

}  // namespace detail

// Header row plus numeric rows, comma separated. The first line is always
// treated as a header.
inline CsvMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  CsvMatrix out;
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  std::size_t blank_line = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (blank_line == 0) blank_line = line_no;
      continue;
    }
    if (blank_line != 0)
      throw ParseError("blank line inside table", blank_line);
    if (line_no == 1) {
      out.header = detail::split_fields(line);
      cols = out.header.size();
      continue;
    }
    const std::vector<std::string> fields = detail::split_fields(line);
    if (fields.size() != cols)
      throw ParseError("expected " + std::to_string(cols) + " columns, got " +
                           std::to_string(fields.size()),
                       line_no);
    for (std::size_t c = 0; c < fields.size(); ++c)
      data.push_back(detail::parse_cell(fields[c], line_no, c + 1));
    ++rows;
  }
  if (line_no == 0) throw InvalidInput("'" + path + "' is empty");
  if (rows == 0) throw InvalidInput("'" + path + "' has no data rows");
  out.values.resize(Index(rows), Index(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out.values(Index(r), Index(c)) = data[r * cols + c];
  return out;
}

enum class MatrixKind { phenotype, genotype, covariate };

// CSV ingestion with per-kind validation; any problem is reported before the
// matrix is used.
inline Matrix ingest_matrix(const std::string& path, MatrixKind kind) {
  const CsvMatrix csv = read_csv_matrix(path);
  const Matrix& m = csv.values;
  switch (kind) {
    case MatrixKind::phenotype:
      require_sample_matrix(m, "phenotype matrix");
      break;
    case MatrixKind::covariate:
      if (!m.allFinite())
        throw InvalidInput("covariate matrix in '" + path +
                           "' has non-finite entries");
      break;
    case MatrixKind::genotype:
      for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) {
          const double v = m(i, j);
          if (v != 0.0 && v != 1.0 && v != 2.0)
            throw InvalidInput("genotype value " + detail::format_g(v) +
                               " at row " + std::to_string(i + 1) +
                               ", column " + std::to_string(j + 1) + " of '" +
                               path + "' must be 0, 1 or 2");
        }
      require_sample_matrix(m, "genotype matrix");
      break;
  }
  return m;
}

inline std::string format_double(double v, int significant) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
  return buf;
}

// 17 significant digits: rereading the file reproduces the doubles bit for
// bit.
inline void write_csv_matrix(std::ostream& out,
                             const std::vector<std::string>& header,
                             const Matrix& m) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j), 17);
    }
    out << '\n';
  }
}

inline void write_csv_matrix(const std::string& path,
                             const std::vector<std::string>& header,
                             const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  write_csv_matrix(out, header, m);
}

inline std::string test_result_csv(const TestResult& r) {
  std::ostringstream out;
  out << "statistic,p_value,permutations,seed,method\n";
  out << format_double(r.statistic, 17) << ','
      << format_double(r.p_value, 17) << ',' << r.n_permutations << ','
      << r.seed << ',' << r.method << '\n';
  return out.str();
}

inline nlohmann::json test_result_json(const TestResult& r) {
  return nlohmann::json{{"statistic", r.statistic},
                        {"p_value", r.p_value},
                        {"permutations", r.n_permutations},
                        {"seed", r.seed},
                        {"method", r.method}};
}

inline std::string study_csv(const StudyResult& s) {
  std::ostringstream out;
  out << "method,kernel_k,kernel_l,adjusted,a,sigma,effect,rejection_rate,R,B,"
         "seed\n";
  for (const StudyCell& cell : s.cells) {
    out << cell.method.family << ',' << cell.method.kernel_k.str() << ','
        << cell.method.kernel_l.str() << ','
        << (cell.method.adjusted ? "true" : "false") << ','
        << detail::format_g(cell.a) << ',' << cell.sigma << ',' << cell.effect
        << ',' << format_double(cell.rate, 6) << ',' << s.replicates << ','
        << s.permutations << ',' << s.seed << '\n';
  }
  return out.str();
}

inline nlohmann::json study_json(const StudyResult& s) {
  nlohmann::json cells = nlohmann::json::array();
  for (const StudyCell& cell : s.cells)
    cells.push_back({{"method", cell.method.family},
                     {"kernel_k", cell.method.kernel_k.str()},
                     {"kernel_l", cell.method.kernel_l.str()},
                     {"adjusted", cell.method.adjusted},
                     {"a", cell.a},
                     {"sigma", cell.sigma},
                     {"effect", cell.effect},
                     {"rejections", cell.rejections},
                     {"rejection_rate", cell.rate}});
  nlohmann::json doc{{"study", s.study},
                     {"replicates", s.replicates},
                     {"permutations", s.permutations},
                     {"alpha", s.alpha},
                     {"seed", s.seed},
                     {"cells", std::move(cells)}};
  for (const auto& [key, value] : s.log) doc["log"][key] = value;
  return doc;
}

}  // namespace kdc
