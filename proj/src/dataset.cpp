#include "netsem/dataset.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "netsem/error.hpp"
#include "netsem/value.hpp"

namespace netsem {

std::string_view ColumnTypeName(ColumnType type) {
  switch (type) {
    case ColumnType::kBinary:
      return "binary";
    case ColumnType::kCategorical:
      return "categorical";
    case ColumnType::kContinuous:
      return "continuous";
  }
  return "continuous";
}

const Column* Dataset::Find(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const Column& Dataset::Get(std::string_view name) const {
  const Column* c = Find(name);
  if (c == nullptr) throw ModelError("no column named '" + std::string(name) + "'");
  return *c;
}

void Dataset::Add(Column column) {
  if (Has(column.name)) throw ModelError("duplicate column '" + column.name + "'");
  if (static_cast<std::int32_t>(column.values.size()) != n_) {
    throw ModelError("column '" + column.name + "' has length " +
                     std::to_string(column.values.size()) + ", expected " + std::to_string(n_));
  }
  columns_.push_back(std::move(column));
}

void Dataset::Set(Column column) {
  if (static_cast<std::int32_t>(column.values.size()) != n_) {
    throw ModelError("column '" + column.name + "' has wrong length");
  }
  for (auto& c : columns_) {
    if (c.name == column.name) {
      c = std::move(column);
      return;
    }
  }
  columns_.push_back(std::move(column));
}

std::string FormatDouble(double x) {
  if (IsMissing(x)) return {};
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void WriteDatasetCsv(std::ostream& out, const Dataset& data) {
  const auto& cols = data.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c > 0) out << ',';
    out << cols[c].name;
  }
  out << '\n';
  if (cols.empty()) return;
  for (std::int32_t i = 0; i < data.n(); ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c > 0) out << ',';
      out << FormatDouble(cols[c].values[i]);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    if (end == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

double ParseField(const std::string& field, std::size_t line_no) {
  if (field.empty()) return kMissing;
  double value = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParameterError("data csv line " + std::to_string(line_no) + ": bad number '" +
                         field + "'");
  }
  return value;
}

}  // namespace

Dataset ReadDatasetCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  bool have_header = false;
  std::vector<std::vector<double>> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    if (!have_header) {
      have_header = true;
      if (!line.empty()) header = SplitCsvLine(line);
      values.resize(header.size());
      continue;
    }
    if (header.empty()) {
      throw ParameterError("data csv line " + std::to_string(line_no) +
                           ": data row without columns");
    }
    auto fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw ParameterError("data csv line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields");
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      values[c].push_back(ParseField(fields[c], line_no));
    }
  }
  const auto n = static_cast<std::int32_t>(values.empty() ? 0 : values.front().size());
  Dataset data(n);
  for (std::size_t c = 0; c < header.size(); ++c) {
    bool binary = true;
    bool integral = true;
    for (double v : values[c]) {
      if (IsMissing(v)) continue;
      if (v != 0.0 && v != 1.0) binary = false;
      if (v != std::floor(v)) integral = false;
    }
    ColumnType type = binary ? ColumnType::kBinary
                             : (integral ? ColumnType::kCategorical : ColumnType::kContinuous);
    data.Add(Column{header[c], type, std::move(values[c])});
  }
  return data;
}

}  // namespace netsem
