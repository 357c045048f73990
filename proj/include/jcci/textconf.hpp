#pragma once

// Reader/writer for the structured-text format shared by the registry,
// cluster designs, query scenarios, and thermal configs.
//
//   # comment
//   [device.pixel_3a]            section path, dot separated
//   p100_w = 2.5                 number
//   name = "Pixel 3A"            string
//   reused_default = true        bool
//   load_fractions = [1.0, 0.5]  number array
//   tags = ["a", "b"]            string array

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace jcci::textconf {

using Value = std::variant<double, std::string, bool, std::vector<double>, std::vector<std::string>>;

struct Entry {
  std::string key;
  Value value;
  int line = 0;
};

class Section {
 public:
  Section(std::string source, std::string path, int line) : source_(std::move(source)), path_(std::move(path)), line_(line) {}

  const std::string& path() const { return path_; }
  int line() const { return line_; }
  // Path components: "device.pixel_3a.battery" -> {"device","pixel_3a","battery"}.
  std::vector<std::string> parts() const;

  void add(Entry e);
  bool has(std::string_view key) const;
  const std::vector<Entry>& entries() const { return entries_; }

  double number(std::string_view key) const;
  std::optional<double> opt_number(std::string_view key) const;
  std::string string(std::string_view key) const;
  std::optional<std::string> opt_string(std::string_view key) const;
  bool boolean(std::string_view key, bool fallback) const;
  std::vector<double> numbers(std::string_view key) const;
  std::vector<std::string> strings(std::string_view key) const;

  // Throws ParseError naming the first key that no accessor read.
  void reject_unread() const;

 private:
  const Entry& require(std::string_view key) const;
  const Entry* find(std::string_view key) const;

  std::string source_;
  std::string path_;
  int line_;
  std::vector<Entry> entries_;
  mutable std::set<std::string, std::less<>> read_;
};

class Document {
 public:
  static Document parse(std::string_view text, const std::string& source = "<string>");
  static Document load(const std::string& path);

  const std::vector<Section>& sections() const { return sections_; }
  const std::string& source() const { return source_; }
  // Sections whose first path component equals kind.
  std::vector<const Section*> of_kind(std::string_view kind) const;
  const Section* find(std::string_view path) const;

 private:
  std::string source_;
  std::vector<Section> sections_;
};

// Deterministic writer; numbers round-trip exactly.
class Writer {
 public:
  void comment(std::string_view text);
  void section(std::string_view path);
  void number(std::string_view key, double v);
  void string(std::string_view key, std::string_view v);
  void boolean(std::string_view key, bool v);
  void numbers(std::string_view key, const std::vector<double>& v);
  void strings(std::string_view key, const std::vector<std::string>& v);
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

std::string format_number(double v);

}  // namespace jcci::textconf
