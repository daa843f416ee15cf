#include "texmvs/toml.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "texmvs/error.h"

namespace texmvs::toml {
namespace {

[[noreturn]] void Fail(int line, const std::string& what) {
  throw Error(ErrorKind::kConfigError,
              "toml line " + std::to_string(line) + ": " + what);
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

// Strips a trailing comment, ignoring '#' inside double-quoted strings.
std::string_view StripComment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) {
      ++i;
    } else if (s[i] == '"') {
      in_string = !in_string;
    } else if (s[i] == '#' && !in_string) {
      return s.substr(0, i);
    }
  }
  return s;
}

bool IsBareKey(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.') {
      return false;
    }
  }
  return true;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

  Value ParseAll() {
    Value v = ParseValue();
    SkipSpace();
    if (pos_ != text_.size()) Fail(line_, "trailing characters after value");
    return v;
  }

 private:
  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  Value ParseValue() {
    SkipSpace();
    if (pos_ >= text_.size()) Fail(line_, "missing value");
    const char c = text_[pos_];
    if (c == '"') return Value{ParseString()};
    if (c == '[') return Value{ParseArray()};
    if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return Value{true};
    }
    if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return Value{false};
    }
    return ParseNumber();
  }

  std::string ParseString() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) Fail(line_, "dangling escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: Fail(line_, std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) Fail(line_, "unterminated string");
    ++pos_;
    return out;
  }

  Array ParseArray() {
    ++pos_;
    Array out;
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      out.push_back(ParseValue());
      SkipSpace();
      if (pos_ >= text_.size()) Fail(line_, "unterminated array");
      if (text_[pos_] == ',') {
        ++pos_;
        SkipSpace();
        if (pos_ < text_.size() && text_[pos_] == ']') {
          ++pos_;
          return out;
        }
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return out;
      }
      Fail(line_, "expected ',' or ']' in array");
    }
  }

  Value ParseNumber() {
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] != ',' && text_[end] != ']' &&
           !std::isspace(static_cast<unsigned char>(text_[end]))) {
      ++end;
    }
    std::string token(text_.substr(pos_, end - pos_));
    std::erase(token, '_');
    if (token.empty()) Fail(line_, "missing value");
    pos_ = end;
    const bool is_float = token.find_first_of(".eEn") != std::string::npos;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first;
    if (!is_float) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last) Fail(line_, "bad integer '" + token + "'");
      return Value{v};
    }
    if (token == "inf" || token == "+inf") return Value{HUGE_VAL};
    if (token == "-inf") return Value{-HUGE_VAL};
    if (token == "nan" || token == "+nan" || token == "-nan") return Value{NAN};
    double v = 0.0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) Fail(line_, "bad float '" + token + "'");
    return Value{v};
  }

  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, p);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string FormatString(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

std::string FormatValue(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return FormatDouble(x);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return FormatString(x);
        } else {
          std::string out = "[";
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (i) out += ", ";
            out += FormatValue(x[i]);
          }
          return out + "]";
        }
      },
      v.data);
}

void WriteTable(std::ostringstream& out, const Table& table) {
  for (const auto& [key, value] : table.entries()) {
    out << key << " = " << FormatValue(value) << "\n";
  }
}

}  // namespace

double Value::AsNumber() const {
  if (const auto* i = std::get_if<std::int64_t>(&data)) {
    return static_cast<double>(*i);
  }
  return std::get<double>(data);
}

void Table::Set(const std::string& key, Value value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

const Value* Table::Find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::optional<double> Table::GetNumber(std::string_view key) const {
  const Value* v = Find(key);
  if (!v) return std::nullopt;
  if (!v->IsNumber()) {
    throw Error(ErrorKind::kConfigError, "key '" + std::string(key) + "' must be a number");
  }
  return v->AsNumber();
}

std::optional<std::int64_t> Table::GetInt(std::string_view key) const {
  const Value* v = Find(key);
  if (!v) return std::nullopt;
  if (const auto* i = std::get_if<std::int64_t>(&v->data)) return *i;
  if (const auto* d = std::get_if<double>(&v->data)) {
    if (std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
  }
  throw Error(ErrorKind::kConfigError, "key '" + std::string(key) + "' must be an integer");
}

std::optional<bool> Table::GetBool(std::string_view key) const {
  const Value* v = Find(key);
  if (!v) return std::nullopt;
  if (const auto* b = std::get_if<bool>(&v->data)) return *b;
  throw Error(ErrorKind::kConfigError, "key '" + std::string(key) + "' must be a boolean");
}

std::optional<std::string> Table::GetString(std::string_view key) const {
  const Value* v = Find(key);
  if (!v) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&v->data)) return *s;
  throw Error(ErrorKind::kConfigError, "key '" + std::string(key) + "' must be a string");
}

std::optional<std::vector<double>> Table::GetNumbers(std::string_view key) const {
  const Value* v = Find(key);
  if (!v) return std::nullopt;
  const auto* arr = std::get_if<Array>(&v->data);
  if (!arr) {
    throw Error(ErrorKind::kConfigError, "key '" + std::string(key) + "' must be an array");
  }
  std::vector<double> out;
  for (const Value& e : *arr) {
    if (!e.IsNumber()) {
      throw Error(ErrorKind::kConfigError,
                  "key '" + std::string(key) + "' must hold numbers only");
    }
    out.push_back(e.AsNumber());
  }
  return out;
}

const Table* Document::FindTable(std::string_view name) const {
  for (const auto& [n, t] : tables) {
    if (n == name) return &t;
  }
  return nullptr;
}

Table& Document::GetOrAddTable(const std::string& name) {
  for (auto& [n, t] : tables) {
    if (n == name) return t;
  }
  tables.emplace_back(name, Table{});
  return tables.back().second;
}

const std::vector<Table>* Document::FindTableArray(std::string_view name) const {
  for (const auto& [n, t] : table_arrays) {
    if (n == name) return &t;
  }
  return nullptr;
}

Document Parse(std::string_view text) {
  Document doc;
  Table* current = &doc.root;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = Trim(StripComment(text.substr(start, end - start)));
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (line.starts_with("[[")) {
      if (!line.ends_with("]]")) Fail(line_no, "unterminated table-array header");
      std::string name(Trim(line.substr(2, line.size() - 4)));
      if (!IsBareKey(name)) Fail(line_no, "bad table-array name");
      auto it = std::find_if(doc.table_arrays.begin(), doc.table_arrays.end(),
                             [&](const auto& e) { return e.first == name; });
      if (it == doc.table_arrays.end()) {
        doc.table_arrays.emplace_back(name, std::vector<Table>{});
        it = doc.table_arrays.end() - 1;
      }
      it->second.emplace_back();
      current = &it->second.back();
    } else if (line.starts_with("[")) {
      if (!line.ends_with("]")) Fail(line_no, "unterminated table header");
      std::string name(Trim(line.substr(1, line.size() - 2)));
      if (!IsBareKey(name)) Fail(line_no, "bad table name");
      if (doc.FindTable(name)) Fail(line_no, "duplicate table [" + name + "]");
      current = &doc.GetOrAddTable(name);
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) Fail(line_no, "expected key = value");
      std::string key(Trim(line.substr(0, eq)));
      if (!IsBareKey(key)) Fail(line_no, "bad key '" + key + "'");
      if (current->Contains(key)) Fail(line_no, "duplicate key '" + key + "'");
      current->Set(key, ValueParser(line.substr(eq + 1), line_no).ParseAll());
    }
    if (end == text.size()) break;
  }
  return doc;
}

Document ParseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

std::string Write(const Document& doc) {
  std::ostringstream out;
  WriteTable(out, doc.root);
  for (const auto& [name, table] : doc.tables) {
    out << "\n[" << name << "]\n";
    WriteTable(out, table);
  }
  for (const auto& [name, tables] : doc.table_arrays) {
    for (const Table& table : tables) {
      out << "\n[[" << name << "]]\n";
      WriteTable(out, table);
    }
  }
  return out.str();
}

}  // namespace texmvs::toml
