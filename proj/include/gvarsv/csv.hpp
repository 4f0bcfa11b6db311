#pragma once

#include <string>
#include <vector>

#include "gvarsv/errors.hpp"

namespace gvarsv {

// Comma-separated table with a header row. No quoting or escaping: none of
// the inputs (country codes, variable tokens, quarters, numbers) need it.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line per row

  // Column position of `name`; throws DataError listing available columns.
  int col(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Strict double parse; `context` names the cell in the error message.
double parse_double(const std::string& text, const std::string& context);

long parse_long(const std::string& text, const std::string& context);

}  // namespace gvarsv
