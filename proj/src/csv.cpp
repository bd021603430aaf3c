#include "histgbt/csv.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <string_view>

#include "histgbt/error.hpp"

namespace histgbt {

namespace {

std::string_view trim(std::string_view cell) {
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) {
    cell.remove_prefix(1);
  }
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) {
    cell.remove_suffix(1);
  }
  return cell;
}

bool is_nan_token(std::string_view cell) {
  if (cell.size() != 3) return false;
  const auto lower = [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  };
  return lower(cell[0]) == 'n' && lower(cell[1]) == 'a' &&
         lower(cell[2]) == 'n';
}

double parse_cell(std::string_view raw, std::size_t data_row,
                  const std::string& column_name) {
  const std::string_view cell = trim(raw);
  if (cell.empty() || is_nan_token(cell)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::string_view digits = cell;
  // from_chars accepts a leading '-' but not '+'.
  if (digits.front() == '+') digits.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw Error(ErrorCode::ParseError,
                "cell '" + std::string(cell) + "' at (row " +
                    std::to_string(data_row) + ", col " + column_name +
                    ") is not numeric");
  }
  return value;
}

// Splits one line on commas; no quoting rules, cells are plain numbers.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    if (column_names[j] == name) return j;
  }
  throw Error(ErrorCode::SchemaError, "no column named '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const std::string& existing : column_names) {
    if (existing == name) return true;
  }
  return false;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  }

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ParseError, "'" + path + "' has no header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (std::string_view name : split_fields(line)) {
    table.column_names.emplace_back(trim(name));
  }
  table.columns.resize(table.column_names.size());

  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++data_row;
    const std::vector<std::string_view> fields = split_fields(line);
    if (fields.size() != table.column_names.size()) {
      throw Error(ErrorCode::ParseError,
                  "row " + std::to_string(data_row) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.column_names.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      table.columns[j].push_back(
          parse_cell(fields[j], data_row, table.column_names[j]));
    }
  }
  table.n_rows = data_row;
  return table;
}

Dataset make_dataset(const CsvTable& table, const std::string& label_column) {
  const std::size_t label_index = table.column_index(label_column);
  Dataset data;
  for (std::size_t j = 0; j < table.column_names.size(); ++j) {
    if (j == label_index) continue;
    data.add_column(table.column_names[j],
                    attach_column(table.columns[j].data(), table.n_rows,
                                  sizeof(double)));
  }
  data.set_labels(table.columns[label_index].data(), table.n_rows);
  return data;
}

Dataset make_dataset(const CsvTable& table) {
  Dataset data;
  for (std::size_t j = 0; j < table.column_names.size(); ++j) {
    data.add_column(table.column_names[j],
                    attach_column(table.columns[j].data(), table.n_rows,
                                  sizeof(double)));
  }
  return data;
}

}  // namespace histgbt
