#pragma once

#include <string>
#include <vector>

#include "histgbt/columnar.hpp"

// CSV ingestion into column-major 8-byte buffers. The parsed table is the
// single value store for a session; datasets and side tables only view it.

namespace histgbt {

struct CsvTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;
  std::size_t n_rows = 0;

  // Index of a named column; SchemaError when absent.
  std::size_t column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

// Requires a header row; every cell must be numeric, with an empty cell or
// "NaN" (any case) parsed as missing. Unparseable cells raise ParseError
// with one-based data-row and column coordinates.
CsvTable read_csv(const std::string& path);

// Attaches every column except `label_column` as a feature and wires the
// label buffer; SchemaError when the label is absent. The table must
// outlive the dataset.
Dataset make_dataset(const CsvTable& table, const std::string& label_column);

// All columns attached as features, no labels.
Dataset make_dataset(const CsvTable& table);

}  // namespace histgbt
