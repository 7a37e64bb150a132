#include "greenforms/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "greenforms/errors.hpp"

namespace greenforms {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw Error(ErrorCode::ShapeMismatch, "row has " + std::to_string(row.size()) + " cells, table has " +
                                              std::to_string(columns_.size()) + " columns");
  rows_.push_back(std::move(row));
}

std::vector<double> Table::numbers(const std::string& column) const {
  const auto it = std::find(columns_.begin(), columns_.end(), column);
  if (it == columns_.end()) throw Error(ErrorCode::ShapeMismatch, "no column '" + column + "'");
  const auto c = static_cast<std::size_t>(it - columns_.begin());
  std::vector<double> out;
  for (const auto& r : rows_) {
    if (const auto* d = std::get_if<double>(&r[c])) out.push_back(*d);
    else if (const auto* i = std::get_if<long long>(&r[c])) out.push_back(static_cast<double>(*i));
    else throw Error(ErrorCode::ShapeMismatch, "column '" + column + "' is not numeric");
  }
  return out;
}

namespace {

std::string render(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

std::string Table::csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
  out += '\n';
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + render(r[i]);
    out += '\n';
  }
  return out;
}

std::string loglog_svg(const LogLogPlot& p) {
  if (p.x.empty() || p.x.size() != p.y.size()) throw Error(ErrorCode::EmptyReport, "nothing to plot");
  const double w = 480, h = 360, m = 48;
  auto [xmin_it, xmax_it] = std::minmax_element(p.x.begin(), p.x.end());
  auto [ymin_it, ymax_it] = std::minmax_element(p.y.begin(), p.y.end());
  double x0 = *xmin_it, x1 = *xmax_it, y0 = *ymin_it, y1 = *ymax_it;
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
  x0 -= px; x1 += px; y0 -= py; y1 += py;
  auto sx = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto sy = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };

  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  s << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"" << m / 2 << "\" text-anchor=\"middle\">" << p.title << "</text>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << p.x_label << "</text>\n";
  s << "<text x=\"14\" y=\"" << h / 2 << "\" transform=\"rotate(-90 14 " << h / 2 << ")\" text-anchor=\"middle\">"
    << p.y_label << "</text>\n";
  for (std::size_t i = 0; i < p.x.size(); ++i)
    s << "<circle cx=\"" << sx(p.x[i]) << "\" cy=\"" << sy(p.y[i]) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  s << "<line class=\"fit\" x1=\"" << sx(x0) << "\" y1=\"" << sy(p.intercept + p.slope * x0) << "\" x2=\"" << sx(x1)
    << "\" y2=\"" << sy(p.intercept + p.slope * x1) << "\" stroke=\"#d62728\"/>\n";
  s << "<text x=\"" << w - m << "\" y=\"" << m + 16 << "\" text-anchor=\"end\">slope " << format_number(p.slope)
    << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingInput, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void emit_report(const std::filesystem::path& path, ReportFormat format, const Table& table, const LogLogPlot* plot) {
  if (format == ReportFormat::csv) {
    write_text(path, table.csv());
    return;
  }
  if (!plot || table.empty()) throw Error(ErrorCode::EmptyReport, "log-log plot needs rows and a fit");
  write_text(path, loglog_svg(*plot));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace greenforms
