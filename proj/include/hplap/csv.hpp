#ifndef HPLAP_CSV_HPP_
#define HPLAP_CSV_HPP_

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hplap/error.hpp"
#include "hplap/feature_table.hpp"

namespace hplap::csv {

inline std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view text, const std::string& where) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error(where + ": not a number: '" + std::string(text) + "'");
  return value;
}

inline int parse_int(std::string_view text, const std::string& where) {
  text = trim(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error(where + ": not an integer: '" + std::string(text) + "'");
  return value;
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("cannot format double");
  return std::string(buf, ptr);
}

inline std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  return in;
}

/// Reads `id,label,group,f0,...,f{d-1}`. Empty label cells mean unlabeled;
/// the group column is kept only if every row fills it.
inline FeatureTable parse_features(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw Error(source + ": empty feature CSV");
  const auto header = split_line(line);
  if (header.size() < 4 || trim(header[0]) != "id" || trim(header[1]) != "label" ||
      trim(header[2]) != "group")
    throw Error(source + ": header must be id,label,group,f0,...");
  const std::size_t dims = header.size() - 3;

  std::vector<std::vector<double>> rows;
  FeatureTable table;
  std::vector<std::optional<int>> groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() != header.size())
      throw Error(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                  std::to_string(cells.size()));
    table.ids.emplace_back(trim(cells[0]));
    const auto label = trim(cells[1]);
    table.class_labels.push_back(label.empty() ? std::nullopt
                                               : std::optional<int>(parse_int(label, where)));
    const auto group = trim(cells[2]);
    groups.push_back(group.empty() ? std::nullopt : std::optional<int>(parse_int(group, where)));
    std::vector<double> row(dims);
    for (std::size_t j = 0; j < dims; ++j) row[j] = parse_double(cells[3 + j], where);
    rows.push_back(std::move(row));
  }

  table.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < dims; ++j)
      table.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  bool any_group = false, all_groups = !groups.empty();
  for (const auto& g : groups) {
    any_group = any_group || g.has_value();
    all_groups = all_groups && g.has_value();
  }
  if (any_group && !all_groups) throw Error(source + ": group column is partially filled");
  if (all_groups) {
    table.group_labels.emplace();
    for (const auto& g : groups) table.group_labels->push_back(*g);
  }
  table.validate();
  return table;
}

inline FeatureTable read_features(const std::string& path) {
  auto in = open_for_read(path);
  return parse_features(in, path);
}

inline void write_features(std::ostream& out, const FeatureTable& table) {
  out << "id,label,group";
  for (std::size_t j = 0; j < table.dims(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out << table.id_of(i) << ',';
    if (table.class_labels[i]) out << *table.class_labels[i];
    out << ',';
    if (table.has_groups()) out << (*table.group_labels)[i];
    for (Eigen::Index j = 0; j < table.features.cols(); ++j)
      out << ',' << format_double(table.features(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

/// Dense matrix dump: one CSV line per row, no header.
inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  write_matrix(out, m);
}

inline Eigen::MatrixXd parse_matrix(std::istream& in, const std::string& source = "<stream>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, source + ":" + std::to_string(line_no)));
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(source + ":" + std::to_string(line_no) + ": ragged matrix row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(source + ": empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline Eigen::MatrixXd read_matrix(const std::string& path) {
  auto in = open_for_read(path);
  return parse_matrix(in, path);
}

}  // namespace hplap::csv

#endif  // HPLAP_CSV_HPP_
