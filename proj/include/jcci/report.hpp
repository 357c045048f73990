#pragma once

// CSV tables and minimal standalone SVG line charts. Output is byte-stable for
// identical input: fixed formatting, fixed palette, no timestamps.

#include <optional>
#include <string>
#include <vector>

namespace jcci::report {

class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  // Cells must match the column count.
  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::string to_csv() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Shortest round-trip text of v.
std::string num(double v);
// Fixed number of significant digits.
std::string sig(double v, int digits = 6);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Shade {
  double x0 = 0.0;
  double x1 = 0.0;
  std::string label;
};

struct Dataset {
  std::vector<Series> series;
  std::vector<Shade> shades;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 420;
  std::optional<double> y_min;
  std::optional<double> y_max;
};

// Throws InputError on an empty dataset or a series whose x and y differ in length.
std::string emit_chart(const Dataset& data, const ChartSpec& spec);

// Tick positions inside [lo, hi] at a 1/2/5 x 10^k step.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace jcci::report
