#include "focalcount/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "focalcount/errors.hpp"

namespace focalcount {

namespace {

constexpr const char* kHeader = "epoch,loss_kind,train_loss,mean_uc,val_mae,val_rmse,val_leakage";

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

[[noreturn]] void bad_line(const std::string& source, std::size_t lineno, const std::string& what) {
    throw parse_error(source + ", line " + std::to_string(lineno) + ": " + what);
}

double parse_field(const std::string& source, std::size_t lineno, const std::string& field) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &used);
    } catch (const std::exception&) {
        bad_line(source, lineno, "cannot parse number '" + field + "'");
    }
    if (used != field.size()) bad_line(source, lineno, "cannot parse number '" + field + "'");
    return v;
}

LossKind parse_kind(const std::string& source, std::size_t lineno, const std::string& field) {
    if (field == "mse") return LossKind::MSE;
    if (field == "es") return LossKind::ES;
    if (field == "fmse") return LossKind::FMSE;
    bad_line(source, lineno, "unknown loss kind '" + field + "'");
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr const char* kSeriesColors[] = {"#c0392b", "#2471a3", "#1e8449",
                                         "#b7950b", "#7d3c98", "#5d6d7e"};

} // namespace

std::vector<TrainLogRow> parse_trainlog_csv(const std::string& text, const std::string& source) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw parse_error(source + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) bad_line(source, 1, "expected header '" + std::string(kHeader) + "'");

    std::vector<TrainLogRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 7) {
            bad_line(source, lineno,
                     "expected 7 fields, got " + std::to_string(fields.size()));
        }
        TrainLogRow row;
        const double epoch = parse_field(source, lineno, fields[0]);
        if (epoch < 0.0 || epoch != std::floor(epoch)) {
            bad_line(source, lineno, "epoch must be a non-negative integer");
        }
        row.epoch = static_cast<std::size_t>(epoch);
        row.kind = parse_kind(source, lineno, fields[1]);
        row.train_loss = parse_field(source, lineno, fields[2]);
        row.mean_uc = parse_field(source, lineno, fields[3]);
        row.val_mae = parse_field(source, lineno, fields[4]);
        row.val_rmse = parse_field(source, lineno, fields[5]);
        row.val_leakage = parse_field(source, lineno, fields[6]);
        rows.push_back(row);
    }
    if (rows.empty()) throw parse_error(source + ": no data rows");
    return rows;
}

std::string render_line_chart(const std::string& title, const std::string& y_label,
                              const std::vector<PlotSeries>& series) {
    if (series.empty()) throw contract_error("render_line_chart: no series");
    for (const PlotSeries& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size()) {
            throw contract_error("render_line_chart: series '" + s.label +
                                 "' must be non-empty with matching x and y");
        }
    }

    double x_min = series[0].x[0], x_max = x_min, y_max = 0.0;
    for (const PlotSeries& s : series) {
        for (double v : s.x) {
            x_min = std::min(x_min, v);
            x_max = std::max(x_max, v);
        }
        for (double v : s.y) {
            if (!std::isfinite(v)) throw contract_error("render_line_chart: non-finite value");
            y_max = std::max(y_max, v);
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.05;

    // Fixed geometry: plot box with room for the legend on the right.
    const double left = 62.0, right = 470.0, top = 46.0, bottom = 356.0;
    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
    auto py = [&](double y) { return bottom - y / y_max * (bottom - top); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\">\n";
    svg += "<rect width=\"640\" height=\"400\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"266\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
           "text-anchor=\"middle\">" + escape_xml(title) + "</text>\n";

    // Axes.
    svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(left) +
           "\" y2=\"" + fmt2(bottom) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(bottom) + "\" x2=\"" + fmt2(right) +
           "\" y2=\"" + fmt2(bottom) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    for (int tick = 0; tick <= 4; ++tick) {
        const double xv = x_min + (x_max - x_min) * tick / 4.0;
        const double yv = y_max * tick / 4.0;
        const double xp = px(xv), yp = py(yv);
        svg += "<line x1=\"" + fmt2(xp) + "\" y1=\"" + fmt2(bottom) + "\" x2=\"" + fmt2(xp) +
               "\" y2=\"" + fmt2(bottom + 4.0) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt2(xp) + "\" y=\"" + fmt2(bottom + 18.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               fmt(xv) + "</text>\n";
        svg += "<line x1=\"" + fmt2(left - 4.0) + "\" y1=\"" + fmt2(yp) + "\" x2=\"" + fmt2(left) +
               "\" y2=\"" + fmt2(yp) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt2(left - 8.0) + "\" y=\"" + fmt2(yp + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fmt(yv) +
               "</text>\n";
    }

    svg += "<text x=\"266\" y=\"392\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">epoch</text>\n";
    svg += "<text x=\"16\" y=\"201\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\" transform=\"rotate(-90 16 201)\">" + escape_xml(y_label) +
           "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kSeriesColors[i % (sizeof kSeriesColors / sizeof *kSeriesColors)];
        std::string points;
        for (std::size_t j = 0; j < series[i].x.size(); ++j) {
            if (j) points += ' ';
            points += fmt2(px(series[i].x[j])) + "," + fmt2(py(series[i].y[j]));
        }
        if (series[i].x.size() == 1) {
            svg += "<circle cx=\"" + fmt2(px(series[i].x[0])) + "\" cy=\"" +
                   fmt2(py(series[i].y[0])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
        } else {
            svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"1.5\"/>\n";
        }

        // Legend entry.
        const double ly = 56.0 + 20.0 * static_cast<double>(i);
        svg += "<line x1=\"484\" y1=\"" + fmt2(ly) + "\" x2=\"506\" y2=\"" + fmt2(ly) +
               "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"512\" y=\"" + fmt2(ly + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + escape_xml(series[i].label) +
               "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

} // namespace focalcount
