#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace texmvs::toml {

// Subset of TOML used by scene, config and synthetic-spec files: [table],
// [[array.of.tables]], key = value with bool / integer / float / string
// scalars and single-line arrays of scalars. Insertion order is kept so a
// parse -> write -> parse cycle is the identity.
struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<bool, std::int64_t, double, std::string, Array> data;

  bool IsNumber() const {
    return std::holds_alternative<std::int64_t>(data) ||
           std::holds_alternative<double>(data);
  }
  double AsNumber() const;

  friend bool operator==(const Value&, const Value&) = default;
};

class Table {
 public:
  void Set(const std::string& key, Value value);
  const Value* Find(std::string_view key) const;
  bool Contains(std::string_view key) const { return Find(key) != nullptr; }

  // Typed getters throw ConfigError on a type mismatch and return nullopt when
  // the key is absent.
  std::optional<double> GetNumber(std::string_view key) const;
  std::optional<std::int64_t> GetInt(std::string_view key) const;
  std::optional<bool> GetBool(std::string_view key) const;
  std::optional<std::string> GetString(std::string_view key) const;
  std::optional<std::vector<double>> GetNumbers(std::string_view key) const;

  const std::vector<std::pair<std::string, Value>>& entries() const {
    return entries_;
  }

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::vector<std::pair<std::string, Value>> entries_;
};

struct Document {
  Table root;
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<std::pair<std::string, std::vector<Table>>> table_arrays;

  const Table* FindTable(std::string_view name) const;
  Table& GetOrAddTable(const std::string& name);
  const std::vector<Table>* FindTableArray(std::string_view name) const;

  friend bool operator==(const Document&, const Document&) = default;
};

Document Parse(std::string_view text);
Document ParseFile(const std::string& path);
std::string Write(const Document& doc);

}  // namespace texmvs::toml
