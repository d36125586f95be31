#ifndef LANGINC_CONFIG_HPP_
#define LANGINC_CONFIG_HPP_

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "langinc/errors.hpp"

namespace langinc {

/// Parse or validation failure in a configuration file, with a 1-based position (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }
  std::size_t line_;
  std::size_t column_;
};

struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

/// Parsed document: values as JSON plus the position of every key ("table.key").
struct TomlDocument {
  nlohmann::json root = nlohmann::json::object();
  std::map<std::string, SourcePos> positions;

  SourcePos where(const std::string& path) const {
    auto it = positions.find(path);
    return it == positions.end() ? SourcePos{} : it->second;
  }
};

namespace detail {

/*
 * The subset of TOML used by the configuration files: comments, [table] and
 * [a.b] headers, bare or quoted keys, basic strings, integers, floats,
 * booleans, (multi-line) arrays and inline tables. No dates, no array
 * tables, no literal or multi-line strings.
 */
class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : text_(text) {}

  TomlDocument parse() {
    TomlDocument doc;
    std::vector<std::string> table;
    std::set<std::string> defined_tables;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        const SourcePos pos = here();
        advance();
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_spaces();
        table = parse_key_path();
        skip_spaces();
        expect(']');
        end_of_line();
        const std::string name = join(table);
        if (!defined_tables.insert(name).second) fail_at(pos, "table [" + name + "] defined twice");
        nlohmann::json* node = &doc.root;
        for (const auto& part : table) {
          if (node->contains(part) && !(*node)[part].is_object()) fail_at(pos, "key '" + part + "' is not a table");
          node = &(*node)[part];
          if (node->is_null()) *node = nlohmann::json::object();
        }
        doc.positions[name] = pos;
        continue;
      }
      const SourcePos pos = here();
      auto key = parse_key_path();
      skip_spaces();
      expect('=');
      skip_spaces();
      auto value = parse_value(doc, join(table, key));
      end_of_line();
      assign(doc, table, key, std::move(value), pos);
    }
    return doc;
  }

 private:
  static std::string join(const std::vector<std::string>& a, const std::vector<std::string>& b = {}) {
    std::string out;
    for (const auto* v : {&a, &b}) {
      for (const auto& s : *v) {
        if (!out.empty()) out += '.';
        out += s;
      }
    }
    return out;
  }

  void assign(TomlDocument& doc, const std::vector<std::string>& table, const std::vector<std::string>& key,
              nlohmann::json value, SourcePos pos) {
    nlohmann::json* node = &doc.root;
    for (const auto& part : table) node = &(*node)[part];
    for (std::size_t i = 0; i + 1 < key.size(); ++i) {
      if (node->contains(key[i]) && !(*node)[key[i]].is_object()) fail_at(pos, "key '" + key[i] + "' is not a table");
      node = &(*node)[key[i]];
    }
    if (node->contains(key.back())) fail_at(pos, "duplicate key '" + join(table, key) + "'");
    (*node)[key.back()] = std::move(value);
    doc.positions[join(table, key)] = pos;
  }

  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[i_]; }
  SourcePos here() const { return {line_, col_}; }

  void advance() {
    if (at_end()) return;
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, line_, col_); }
  [[noreturn]] static void fail_at(SourcePos p, const std::string& what) { throw ConfigError(what, p.line, p.column); }

  void expect(char c) {
    if (peek() != c) {
      fail(std::string("expected '") + c + "'" + (at_end() ? " before end of file" : ", found '" + std::string(1, peek()) + "'"));
    }
    advance();
  }

  void skip_spaces() {
    while (peek() == ' ' || peek() == '\t') advance();
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') advance();
    }
  }

  void skip_blank_lines() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (peek() == '\r') advance();
      if (peek() == '\n') {
        advance();
        continue;
      }
      return;
    }
  }

  // Whitespace, comments and newlines inside arrays and inline tables.
  void skip_insignificant() { skip_blank_lines(); }

  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (peek() == '\r') advance();
    if (at_end()) return;
    if (peek() != '\n') fail("unexpected '" + std::string(1, peek()) + "' after value");
    advance();
  }

  static bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_simple_key() {
    if (peek() == '"') return parse_string();
    std::string key;
    while (bare_key_char(peek())) {
      key += peek();
      advance();
    }
    if (key.empty()) fail(at_end() ? "expected a key before end of file" : "invalid key character '" + std::string(1, peek()) + "'");
    return key;
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> path{parse_simple_key()};
    skip_spaces();
    while (peek() == '.') {
      advance();
      skip_spaces();
      path.push_back(parse_simple_key());
      skip_spaces();
    }
    return path;
  }

  std::string parse_string() {
    expect('"');
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = peek();
      advance();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      const char e = peek();
      advance();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape '\\") + e + "'");
      }
    }
    return out;
  }

  nlohmann::json parse_value(TomlDocument& doc, const std::string& path) {
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') return parse_array(doc, path);
    if (c == '{') return parse_inline_table(doc, path);
    if (c == 't' || c == 'f') {
      std::string word;
      while (std::isalpha(static_cast<unsigned char>(peek()))) {
        word += peek();
        advance();
      }
      if (word == "true") return true;
      if (word == "false") return false;
      fail("invalid value '" + word + "'");
    }
    return parse_number();
  }

  nlohmann::json parse_number() {
    const SourcePos pos = here();
    std::string tok;
    while (!at_end()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' || c == '_') {
        tok += c;
        advance();
      } else {
        break;
      }
    }
    if (tok.empty()) fail_at(pos, at_end() ? "expected a value before end of file" : "expected a value");
    std::string clean;
    for (char c : tok) {
      if (c != '_') clean += c;
    }
    if (clean == "inf" || clean == "+inf" || clean == "-inf" || clean == "nan") {
      fail_at(pos, "non-finite numbers are not accepted");
    }
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    const char* first = clean.data() + (clean[0] == '+' ? 1 : 0);
    const char* last = clean.data() + clean.size();
    if (!is_float) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return v;
      fail_at(pos, "invalid number '" + tok + "'");
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) fail_at(pos, "invalid number '" + tok + "'");
    return v;
  }

  nlohmann::json parse_array(TomlDocument& doc, const std::string& path) {
    expect('[');
    nlohmann::json arr = nlohmann::json::array();
    skip_insignificant();
    while (peek() != ']') {
      arr.push_back(parse_value(doc, path));
      skip_insignificant();
      if (peek() == ',') {
        advance();
        skip_insignificant();
      } else if (peek() != ']') {
        fail(at_end() ? "unterminated array" : "expected ',' or ']' in array");
      }
    }
    advance();
    return arr;
  }

  nlohmann::json parse_inline_table(TomlDocument& doc, const std::string& path) {
    expect('{');
    nlohmann::json obj = nlohmann::json::object();
    skip_spaces();
    while (peek() != '}') {
      const SourcePos pos = here();
      const std::string key = parse_simple_key();
      skip_spaces();
      expect('=');
      skip_spaces();
      if (obj.contains(key)) fail_at(pos, "duplicate key '" + key + "'");
      obj[key] = parse_value(doc, path + "." + key);
      doc.positions[path + "." + key] = pos;
      skip_spaces();
      if (peek() == ',') {
        advance();
        skip_spaces();
      } else if (peek() != '}') {
        fail(at_end() ? "unterminated inline table" : "expected ',' or '}' in inline table");
      }
    }
    advance();
    return obj;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace detail

inline TomlDocument parse_toml(std::string_view text) { return detail::TomlParser(text).parse(); }

inline TomlDocument load_toml(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

/*
 * Typed, position-aware view of one table of a TomlDocument. Every key read
 * through it is marked as known; finish() rejects whatever is left.
 */
class ConfigTable {
 public:
  ConfigTable(const TomlDocument& doc, std::string path)
      : doc_(&doc), path_(std::move(path)), node_(lookup(doc.root, path_)) {}

  bool present() const { return node_ != nullptr; }
  bool has(const std::string& key) const { return node_ && node_->contains(key); }
  const std::string& path() const { return path_; }

  ConfigTable sub(const std::string& key) {
    used_.insert(key);
    return ConfigTable(*doc_, path_.empty() ? key : path_ + "." + key);
  }

  template <class T>
  std::optional<T> get(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return convert<T>((*node_)[key], key);
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    auto v = get<T>(key);
    return v ? *v : fallback;
  }

  template <class T>
  T require(const std::string& key) {
    auto v = get<T>(key);
    if (!v) fail(key, "missing required key '" + qualified(key) + "'", true);
    return *v;
  }

  /// Unknown keys in this table are errors.
  void finish() const {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!used_.count(it.key())) {
        const auto pos = doc_->where(qualified(it.key()));
        throw ConfigError("unknown key '" + qualified(it.key()) + "'", pos.line, pos.column);
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what, bool at_table = false) const {
    const auto pos = doc_->where(at_table ? path_ : qualified(key));
    throw ConfigError(what, pos.line, pos.column);
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  static const nlohmann::json* lookup(const nlohmann::json& root, const std::string& path) {
    const nlohmann::json* node = &root;
    if (path.empty()) return node;
    std::size_t start = 0;
    while (start <= path.size()) {
      const auto dot = path.find('.', start);
      const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object() || !node->contains(part)) return nullptr;
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return node->is_object() ? node : nullptr;
  }

  template <class T>
  T convert(const nlohmann::json& v, const std::string& key) const {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(key, "'" + qualified(key) + "' must be a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        fail(key, "'" + qualified(key) + "' must be a nonnegative integer");
      }
      return static_cast<T>(v.get<std::int64_t>());
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "'" + qualified(key) + "' must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "'" + qualified(key) + "' must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) fail(key, "'" + qualified(key) + "' must be an array of numbers");
      std::vector<double> out;
      for (const auto& e : v) {
        if (!e.is_number()) fail(key, "'" + qualified(key) + "' must be an array of numbers");
        out.push_back(e.get<double>());
      }
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (!v.is_array()) fail(key, "'" + qualified(key) + "' must be an array of integers");
      std::vector<std::size_t> out;
      for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
          fail(key, "'" + qualified(key) + "' must be an array of nonnegative integers");
        }
        out.push_back(static_cast<std::size_t>(e.get<std::int64_t>()));
      }
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<std::vector<double>>>) {
      if (!v.is_array()) fail(key, "'" + qualified(key) + "' must be an array of arrays");
      std::vector<std::vector<double>> out;
      for (const auto& row : v) {
        if (!row.is_array()) fail(key, "'" + qualified(key) + "' must be an array of arrays");
        std::vector<double> r;
        for (const auto& e : row) {
          if (!e.is_number()) fail(key, "'" + qualified(key) + "' must contain only numbers");
          r.push_back(e.get<double>());
        }
        out.push_back(std::move(r));
      }
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported config value type");
    }
  }

  const TomlDocument* doc_;
  std::string path_;
  const nlohmann::json* node_;
  std::set<std::string> used_;
};

}  // namespace langinc

#endif  // LANGINC_CONFIG_HPP_
