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

#ifndef PIOU_TOOLS_OUTPUT_HPP_
#define PIOU_TOOLS_OUTPUT_HPP_

#include <string>
#include <vector>

namespace piou::cli {

/// Shortest round-trippable rendering of a double ("%.17g" trimmed).
std::string format_number(double v);

/// RFC 4180 writer: CRLF line endings, fields quoted only when needed.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  std::string str() const;

 private:
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart with axes, ticks and a legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double y_min = 0.0, double y_max = 1.0);

}  // namespace piou::cli

#endif  // PIOU_TOOLS_OUTPUT_HPP_
