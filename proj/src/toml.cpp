#include <eagl/toml.hpp>

#include <eagl/errors.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace eagl {

namespace {

struct Cursor {
  const std::string& s;
  std::size_t at = 0;
  int line = 1;

  bool done() const { return at >= s.size(); }
  char peek() const { return s[at]; }
  char take() {
    char c = s[at++];
    if (c == '\n') ++line;
    return c;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("toml line " + std::to_string(line) + ": " + what);
  }
  void skip_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t')) take();
  }
  // Whitespace, comments, and newlines; used between array elements.
  void skip_filler() {
    while (!done()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        take();
      } else if (c == '#') {
        while (!done() && peek() != '\n') take();
      } else {
        break;
      }
    }
  }
};

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string parse_bare(Cursor& cur) {
  std::string out;
  while (!cur.done() && is_bare_key_char(cur.peek())) out.push_back(cur.take());
  if (out.empty()) cur.fail("expected a key");
  return out;
}

std::string parse_string(Cursor& cur) {
  cur.take();  // opening quote
  std::string out;
  while (true) {
    if (cur.done()) cur.fail("unterminated string");
    char c = cur.take();
    if (c == '"') break;
    if (c == '\n') cur.fail("newline inside string");
    if (c == '\\') {
      if (cur.done()) cur.fail("dangling escape");
      char e = cur.take();
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: cur.fail(std::string("unsupported escape \\") + e);
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

TomlValue parse_scalar(Cursor& cur) {
  std::string tok;
  while (!cur.done()) {
    char c = cur.peek();
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' ||
        c == '_' || c == 'e' || c == 'E') {
      tok.push_back(cur.take());
    } else {
      break;
    }
  }
  if (tok.empty()) cur.fail("expected a value");
  if (tok == "true") return {true};
  if (tok == "false") return {false};
  std::string digits;
  for (char c : tok)
    if (c != '_') digits.push_back(c);
  bool floaty = digits.find('.') != std::string::npos ||
                ((digits.find('e') != std::string::npos || digits.find('E') != std::string::npos) &&
                 digits.find("0x") != 0);
  if (!floaty) {
    std::int64_t n = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && p == digits.data() + digits.size()) return {n};
  }
  double d = 0.0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
  if (ec == std::errc() && p == digits.data() + digits.size()) return {d};
  cur.fail("cannot parse value '" + tok + "'");
}

TomlValue parse_value(Cursor& cur);

TomlValue parse_array(Cursor& cur) {
  cur.take();  // '['
  TomlArray items;
  cur.skip_filler();
  while (true) {
    if (cur.done()) cur.fail("unterminated array");
    if (cur.peek() == ']') {
      cur.take();
      break;
    }
    items.push_back(parse_value(cur));
    cur.skip_filler();
    if (!cur.done() && cur.peek() == ',') {
      cur.take();
      cur.skip_filler();
    }
  }
  return {std::move(items)};
}

TomlValue parse_value(Cursor& cur) {
  if (cur.peek() == '"') return {parse_string(cur)};
  if (cur.peek() == '[') return parse_array(cur);
  return parse_scalar(cur);
}

const TomlValue& lookup(const TomlTable& t, const std::string& key) {
  auto it = t.find(key);
  if (it == t.end()) throw ParseError("toml: missing key '" + key + "'");
  return it->second;
}

[[noreturn]] void type_fail(const std::string& key, const char* want) {
  throw ParseError("toml: key '" + key + "' is not " + want);
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  Cursor cur{text};
  std::string section;
  while (true) {
    cur.skip_filler();
    if (cur.done()) break;
    if (cur.peek() == '[') {
      cur.take();
      cur.skip_ws();
      section = parse_bare(cur);
      cur.skip_ws();
      if (cur.done() || cur.take() != ']') cur.fail("expected ']' after section name");
      continue;
    }
    std::string key = parse_bare(cur);
    cur.skip_ws();
    if (cur.done() || cur.take() != '=') cur.fail("expected '=' after key '" + key + "'");
    cur.skip_ws();
    TomlValue value = parse_value(cur);
    cur.skip_ws();
    if (!cur.done() && cur.peek() == '#')
      while (!cur.done() && cur.peek() != '\n') cur.take();
    if (!cur.done() && cur.peek() != '\n' && cur.peek() != '\r')
      cur.fail("trailing characters after value for '" + key + "'");
    std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) cur.fail("duplicate key '" + full + "'");
    table.emplace(std::move(full), std::move(value));
  }
  return table;
}

TomlTable load_toml(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

bool toml_has(const TomlTable& t, const std::string& key) { return t.count(key) != 0; }

bool toml_bool(const TomlTable& t, const std::string& key) {
  const TomlValue& v = lookup(t, key);
  if (const bool* b = std::get_if<bool>(&v.v)) return *b;
  type_fail(key, "a boolean");
}

bool toml_bool(const TomlTable& t, const std::string& key, bool fallback) {
  return toml_has(t, key) ? toml_bool(t, key) : fallback;
}

std::int64_t toml_int(const TomlTable& t, const std::string& key) {
  const TomlValue& v = lookup(t, key);
  if (const std::int64_t* n = std::get_if<std::int64_t>(&v.v)) return *n;
  type_fail(key, "an integer");
}

std::int64_t toml_int(const TomlTable& t, const std::string& key, std::int64_t fallback) {
  return toml_has(t, key) ? toml_int(t, key) : fallback;
}

double toml_double(const TomlTable& t, const std::string& key) {
  const TomlValue& v = lookup(t, key);
  if (const double* d = std::get_if<double>(&v.v)) return *d;
  if (const std::int64_t* n = std::get_if<std::int64_t>(&v.v)) return static_cast<double>(*n);
  type_fail(key, "a number");
}

double toml_double(const TomlTable& t, const std::string& key, double fallback) {
  return toml_has(t, key) ? toml_double(t, key) : fallback;
}

std::string toml_string(const TomlTable& t, const std::string& key) {
  const TomlValue& v = lookup(t, key);
  if (const std::string* s = std::get_if<std::string>(&v.v)) return *s;
  type_fail(key, "a string");
}

std::string toml_string(const TomlTable& t, const std::string& key, const std::string& fallback) {
  return toml_has(t, key) ? toml_string(t, key) : fallback;
}

namespace {

const TomlArray& array_at(const TomlTable& t, const std::string& key) {
  const TomlValue& v = lookup(t, key);
  if (const TomlArray* a = std::get_if<TomlArray>(&v.v)) return *a;
  type_fail(key, "an array");
}

}  // namespace

std::vector<std::int64_t> toml_int_list(const TomlTable& t, const std::string& key) {
  std::vector<std::int64_t> out;
  for (const TomlValue& v : array_at(t, key)) {
    if (const std::int64_t* n = std::get_if<std::int64_t>(&v.v))
      out.push_back(*n);
    else
      type_fail(key, "an integer array");
  }
  return out;
}

std::vector<double> toml_double_list(const TomlTable& t, const std::string& key) {
  std::vector<double> out;
  for (const TomlValue& v : array_at(t, key)) {
    if (const double* d = std::get_if<double>(&v.v))
      out.push_back(*d);
    else if (const std::int64_t* n = std::get_if<std::int64_t>(&v.v))
      out.push_back(static_cast<double>(*n));
    else
      type_fail(key, "a number array");
  }
  return out;
}

std::vector<std::string> toml_string_list(const TomlTable& t, const std::string& key) {
  std::vector<std::string> out;
  for (const TomlValue& v : array_at(t, key)) {
    if (const std::string* s = std::get_if<std::string>(&v.v))
      out.push_back(*s);
    else
      type_fail(key, "a string array");
  }
  return out;
}

}  // namespace eagl
