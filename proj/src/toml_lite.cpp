#include "specseg/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "specseg/error.hpp"

namespace specseg {
using nlohmann::json;

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, int line_no) : s_(line), line_no_(line_no) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::InvalidConfig, "TOML line " + std::to_string(line_no_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> parts;
    do {
      skip_ws();
      parts.push_back(key_part());
    } while (consume('.'));
    return parts;
  }

  json value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (c == '{') fail("inline tables are not supported");
    return scalar();
  }

 private:
  std::string key_part() {
    if (pos_ < s_.size() && s_[pos_] == '"') return basic_string();
    if (pos_ < s_.size() && s_[pos_] == '\'') return literal_string();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string basic_string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("dangling escape");
        switch (s_[pos_++]) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape sequence");
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string literal_string() {
    ++pos_;
    const std::size_t end = s_.find('\'', pos_);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  json array() {
    ++pos_;
    json out = json::array();
    if (consume(']')) return out;
    do {
      if (consume(']')) return out;  // trailing comma
      out.push_back(value());
    } while (consume(','));
    expect(']');
    return out;
  }

  json scalar() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t') {
      ++pos_;
    }
    std::string token(s_.substr(start, pos_ - start));
    if (token == "true") return true;
    if (token == "false") return false;
    std::erase(token, '_');
    if (token.empty()) fail("missing value");
    const char* first = token.data() + (token[0] == '+' ? 1 : 0);
    const char* last = token.data() + token.size();
    const bool is_float = token.find_first_of(".eE") != std::string::npos || token.find("inf") != std::string::npos ||
                          token.find("nan") != std::string::npos;
    if (!is_float) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return v;
    } else {
      std::istringstream in{std::string(first, last)};
      double v = 0.0;
      in >> v;
      if (in && in.peek() == EOF) return v;
    }
    fail("invalid value '" + std::string(s_.substr(start, pos_ - start)) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_no_;
};

json& descend(json& root, const std::vector<std::string>& path, std::size_t count, const LineParser& p) {
  json* node = &root;
  for (std::size_t i = 0; i < count; ++i) {
    json& next = (*node)[path[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) p.fail("key '" + path[i] + "' is not a table");
    node = &next;
  }
  return *node;
}

}  // namespace

json parse_toml(std::string_view text) {
  json root = json::object();
  json* table = &root;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    ++line_no;

    LineParser p(line, line_no);
    if (p.at_end_or_comment()) continue;
    if (p.consume('[')) {
      if (p.consume('[')) p.fail("arrays of tables are not supported");
      const auto path = p.key_path();
      p.expect(']');
      if (!p.at_end_or_comment()) p.fail("trailing characters after table header");
      table = &descend(root, path, path.size(), p);
      continue;
    }
    const auto path = p.key_path();
    p.expect('=');
    json v = p.value();
    if (!p.at_end_or_comment()) p.fail("trailing characters after value");
    json& parent = descend(*table, path, path.size() - 1, p);
    if (parent.contains(path.back())) p.fail("duplicate key '" + path.back() + "'");
    parent[path.back()] = std::move(v);
  }
  return root;
}

json load_toml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_toml(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace specseg
