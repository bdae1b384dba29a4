// Copyright 2026 The piou Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace piou::cli {
namespace {

std::string quote_field(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) { rows_.push_back(std::move(header)); }

void CsvWriter::add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

std::string CsvWriter::str() const {
  std::string out;
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += quote_field(row[i]);
    }
    out += "\r\n";
  }
  return out;
}

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double y_min, double y_max) {
  constexpr double kWidth = 800, kHeight = 500;
  constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_max = 1.0;
  for (const Series& s : series) {
    if (!s.x.empty()) x_max = std::max(x_max, *std::max_element(s.x.begin(), s.x.end()));
  }
  auto px = [&](double x) { return kLeft + plot_w * x / x_max; };
  auto py = [&](double y) { return kTop + plot_h * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape_xml(title) << "</text>\n";

  // Grid and ticks.
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" stroke-width=\"1\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double y = y_min + (y_max - y_min) * k / 5.0;
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(y) << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << py(y)
        << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << fixed(y, 1)
        << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double x = x_max * k / 5.0;
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << kTop << "\" x2=\"" << px(x) << "\" y2=\"" << kTop + plot_h
        << "\" stroke=\"#eeeeee\"/>\n"
        << "<text x=\"" << px(x) << "\" y=\"" << kTop + plot_h + 16 << "\" text-anchor=\"middle\">"
        << fixed(x, 0) << "</text>\n";
  }
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
      << escape_xml(x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">" << escape_xml(y_label) << "</text>\n"
      << "</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const Series& line = series[s];
    svg << "<polyline fill=\"none\" stroke=\"" << escape_xml(line.color) << "\" stroke-width=\"1.5\" points=\"";
    // Thin dense series to at most ~1000 vertices.
    const std::size_t step = std::max<std::size_t>(1, line.x.size() / 1000);
    for (std::size_t i = 0; i < line.x.size(); i += step) {
      if (i > 0) svg << ' ';
      svg << fixed(px(line.x[i]), 2) << ',' << fixed(py(std::clamp(line.y[i], y_min, y_max)), 2);
    }
    svg << "\"/>\n";
    const double ly = kTop + 20 + 22 * static_cast<double>(s);
    svg << "<line x1=\"" << kLeft + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 45
        << "\" y2=\"" << ly << "\" stroke=\"" << escape_xml(line.color) << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + plot_w + 52 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(line.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace piou::cli
