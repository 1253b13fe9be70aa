#pragma once

#include <string>
#include <vector>

#include "focalcount/trainer.hpp"

namespace focalcount {

// Parses text in the trainlog_csv format. source names the input in parse
// errors ("<source>, line N: ..."). A header-only log is rejected; curves
// need at least one row.
std::vector<TrainLogRow> parse_trainlog_csv(const std::string& text, const std::string& source);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Stand-alone SVG line chart, one polyline per series plus axes, ticks and a
// legend. Output bytes depend only on the arguments, so identical inputs
// plot identically. The y axis always starts at zero; series must be
// non-empty and equal-length in x and y.
std::string render_line_chart(const std::string& title, const std::string& y_label,
                              const std::vector<PlotSeries>& series);

} // namespace focalcount
