#include "jcci/textconf.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "jcci/error.hpp"

namespace jcci::textconf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return true;
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool in_str = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

struct ValueParser {
  const std::string& source;
  int line;
  std::string key;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source, line, key, what); }

  double parse_number(std::string_view s) const {
    s = trim(s);
    double v = 0.0;
    // from_chars rejects a leading '+'.
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("expected a number, got '" + std::string(s) + "'");
    return v;
  }

  std::string parse_string(std::string_view s) const {
    s = trim(s);
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail("expected a quoted string");
    std::string out;
    for (size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        char n = s[++i];
        out.push_back(n == 'n' ? '\n' : n);
      } else if (s[i] == '"') {
        fail("unescaped quote inside string");
      } else {
        out.push_back(s[i]);
      }
    }
    return out;
  }

  std::vector<std::string_view> split_items(std::string_view body) const {
    std::vector<std::string_view> items;
    bool in_str = false;
    size_t start = 0;
    for (size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '"' && (i == 0 || body[i - 1] != '\\')) in_str = !in_str;
      if (body[i] == ',' && !in_str) {
        items.push_back(trim(body.substr(start, i - start)));
        start = i + 1;
      }
    }
    auto last = trim(body.substr(start));
    if (!last.empty() || !items.empty()) items.push_back(last);
    for (auto it : items) {
      if (it.empty()) fail("empty array element");
    }
    return items;
  }

  Value parse(std::string_view s) const {
    s = trim(s);
    if (s.empty()) fail("missing value");
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '"') return parse_string(s);
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated array");
      auto items = split_items(s.substr(1, s.size() - 2));
      if (items.empty()) return std::vector<double>{};
      if (items.front().front() == '"') {
        std::vector<std::string> out;
        for (auto it : items) out.push_back(parse_string(it));
        return out;
      }
      std::vector<double> out;
      for (auto it : items) out.push_back(parse_number(it));
      return out;
    }
    return parse_number(s);
  }
};

const char* type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "number";
    case 1: return "string";
    case 2: return "bool";
    case 3: return "number array";
    default: return "string array";
  }
}

}  // namespace

std::vector<std::string> Section::parts() const {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path_) {
    if (c == '.') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void Section::add(Entry e) {
  if (find(e.key) != nullptr) throw ParseError(source_, e.line, e.key, "duplicate key in [" + path_ + "]");
  entries_.push_back(std::move(e));
}

const Entry* Section::find(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

bool Section::has(std::string_view key) const { return find(key) != nullptr; }

const Entry& Section::require(std::string_view key) const {
  const Entry* e = find(key);
  if (e == nullptr) throw ParseError(source_, line_, std::string(key), "missing field in [" + path_ + "]");
  read_.insert(std::string(key));
  return *e;
}

template <typename T>
static const T& as(const Entry& e, const std::string& source, const char* want) {
  if (const T* v = std::get_if<T>(&e.value)) return *v;
  throw ParseError(source, e.line, e.key, std::string("expected ") + want + ", got " + type_name(e.value));
}

double Section::number(std::string_view key) const { return as<double>(require(key), source_, "number"); }

std::optional<double> Section::opt_number(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::string Section::string(std::string_view key) const { return as<std::string>(require(key), source_, "string"); }

std::optional<std::string> Section::opt_string(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return string(key);
}

bool Section::boolean(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  return as<bool>(require(key), source_, "bool");
}

std::vector<double> Section::numbers(std::string_view key) const {
  return as<std::vector<double>>(require(key), source_, "number array");
}

std::vector<std::string> Section::strings(std::string_view key) const {
  const Entry& e = require(key);
  // An empty array parses as a number array.
  if (auto* v = std::get_if<std::vector<double>>(&e.value); v != nullptr && v->empty()) return {};
  return as<std::vector<std::string>>(e, source_, "string array");
}

void Section::reject_unread() const {
  for (const auto& e : entries_) {
    if (!read_.contains(e.key)) throw ParseError(source_, e.line, e.key, "unknown field in [" + path_ + "]");
  }
}

Document Document::parse(std::string_view text, const std::string& source) {
  Document doc;
  doc.source_ = source;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, line_no, "", "unterminated section header");
      auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_key(name) || name.front() == '.' || name.back() == '.' || name.find("..") != std::string_view::npos) {
        throw ParseError(source, line_no, "", "invalid section name '" + std::string(name) + "'");
      }
      if (doc.find(name) != nullptr) throw ParseError(source, line_no, "", "duplicate section [" + std::string(name) + "]");
      doc.sections_.emplace_back(source, std::string(name), line_no);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "", "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) throw ParseError(source, line_no, key, "invalid key");
    if (doc.sections_.empty()) throw ParseError(source, line_no, key, "field outside of any section");
    ValueParser vp{source, line_no, key};
    doc.sections_.back().add(Entry{key, vp.parse(line.substr(eq + 1)), line_no});
  }
  return doc;
}

Document Document::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::vector<const Section*> Document::of_kind(std::string_view kind) const {
  std::vector<const Section*> out;
  for (const auto& s : sections_) {
    auto p = s.path();
    if (p.size() > kind.size() && p.compare(0, kind.size(), kind) == 0 && p[kind.size()] == '.') {
      out.push_back(&s);
    } else if (p == kind) {
      out.push_back(&s);
    }
  }
  return out;
}

const Section* Document::find(std::string_view path) const {
  for (const auto& s : sections_) {
    if (s.path() == path) return &s;
  }
  return nullptr;
}

std::string format_number(double v) { return fmt::format("{}", v); }

namespace {
std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}
}  // namespace

void Writer::comment(std::string_view text) { out_ += fmt::format("# {}\n", text); }

void Writer::section(std::string_view path) {
  if (!out_.empty()) out_ += "\n";
  out_ += fmt::format("[{}]\n", path);
}

void Writer::number(std::string_view key, double v) { out_ += fmt::format("{} = {}\n", key, format_number(v)); }

void Writer::string(std::string_view key, std::string_view v) { out_ += fmt::format("{} = {}\n", key, quote(v)); }

void Writer::boolean(std::string_view key, bool v) { out_ += fmt::format("{} = {}\n", key, v ? "true" : "false"); }

void Writer::numbers(std::string_view key, const std::vector<double>& v) {
  std::string body;
  for (size_t i = 0; i < v.size(); ++i) body += (i ? ", " : "") + format_number(v[i]);
  out_ += fmt::format("{} = [{}]\n", key, body);
}

void Writer::strings(std::string_view key, const std::vector<std::string>& v) {
  std::string body;
  for (size_t i = 0; i < v.size(); ++i) body += (i ? ", " : "") + quote(v[i]);
  out_ += fmt::format("{} = [{}]\n", key, body);
}

}  // namespace jcci::textconf
