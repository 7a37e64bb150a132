#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace greenforms {

using Cell = std::variant<std::string, double, long long>;

// %.12g, with inf / -inf / nan spelled out
std::string format_number(double v);

// Fixed column order; every row must have one cell per column.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  void add(std::vector<Cell> row);
  const std::vector<Cell>& row(std::size_t i) const { return rows_[i]; }
  // numeric column as doubles (throws ShapeMismatch for text cells)
  std::vector<double> numbers(const std::string& column) const;

  std::string csv() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

struct LogLogPlot {
  std::string title, x_label = "ln d", y_label = "ln |G|";
  std::vector<double> x, y;  // already logarithmic
  double slope = 0.0, intercept = 0.0;
};

// Scatter of (x, y) plus a single <line class="fit"> for the fitted line.
// Throws EmptyReport without points.
std::string loglog_svg(const LogLogPlot& plot);

enum class ReportFormat { csv, svg_loglog };

// Writes table.csv() or loglog_svg(plot); parent directories are created.
void emit_report(const std::filesystem::path& path, ReportFormat format, const Table& table,
                 const LogLogPlot* plot = nullptr);
void write_text(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace greenforms
