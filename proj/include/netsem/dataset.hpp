#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netsem/network.hpp"

namespace netsem {

enum class ColumnType { kBinary, kCategorical, kContinuous };

std::string_view ColumnTypeName(ColumnType type);

struct Column {
  std::string name;
  ColumnType type = ColumnType::kContinuous;
  std::vector<double> values;

  friend bool operator==(const Column&, const Column&) = default;
};

// One row per unit; columns in creation order. The network, when present, is
// shared immutable state.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::int32_t n) : n_(n) {}

  std::int32_t n() const { return n_; }
  const std::vector<Column>& columns() const { return columns_; }

  bool Has(std::string_view name) const { return Find(name) != nullptr; }
  const Column* Find(std::string_view name) const;
  // Throws ModelError when absent.
  const Column& Get(std::string_view name) const;
  std::span<const double> Values(std::string_view name) const { return Get(name).values; }

  // Appends a column; duplicate names or wrong length throw.
  void Add(Column column);
  // Overwrites an existing column's values (and type), or appends it.
  void Set(Column column);

  const std::shared_ptr<const NetworkMatrix>& network() const { return network_; }
  void AttachNetwork(std::shared_ptr<const NetworkMatrix> net) { network_ = std::move(net); }

 private:
  std::int32_t n_ = 0;
  std::vector<Column> columns_;
  std::shared_ptr<const NetworkMatrix> network_;
};

// CSV with a header row; 17 significant digits; empty field for missing.
void WriteDatasetCsv(std::ostream& out, const Dataset& data);
// Column types are not stored in the file: 0/1-only columns read back as
// binary, other integer-valued columns as categorical.
Dataset ReadDatasetCsv(std::istream& in);

// Decimal text with 17 significant digits, "" for missing.
std::string FormatDouble(double x);

}  // namespace netsem
