#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "focalcount/errors.hpp"
#include "focalcount/plot.hpp"
#include "focalcount/trainer.hpp"

using namespace focalcount;

namespace {

std::vector<TrainLogRow> sample_rows(std::size_t epochs) {
    std::vector<TrainLogRow> rows;
    for (std::size_t e = 0; e < epochs; ++e) {
        TrainLogRow row;
        row.epoch = e;
        row.kind = e < 2 ? LossKind::FMSE : LossKind::MSE;
        row.train_loss = 1.0 / (1.0 + static_cast<double>(e));
        row.mean_uc = 0.5;
        row.val_mae = 3.0 - 0.25 * static_cast<double>(e);
        row.val_rmse = 3.5 - 0.25 * static_cast<double>(e);
        row.val_leakage = 0.8 / (1.0 + static_cast<double>(e));
        rows.push_back(row);
    }
    return rows;
}

PlotSeries series_from(const std::vector<TrainLogRow>& rows, const std::string& label) {
    PlotSeries s;
    s.label = label;
    for (const TrainLogRow& row : rows) {
        s.x.push_back(static_cast<double>(row.epoch));
        s.y.push_back(row.val_mae);
    }
    return s;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

}  // namespace

TEST_CASE("trainlog csv round-trips through the parser") {
    const std::vector<TrainLogRow> rows = sample_rows(6);
    const std::vector<TrainLogRow> back = parse_trainlog_csv(trainlog_csv(rows), "mem");
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].epoch == rows[i].epoch);
        CHECK(back[i].kind == rows[i].kind);
        CHECK(back[i].train_loss == doctest::Approx(rows[i].train_loss).epsilon(1e-12));
        CHECK(back[i].val_leakage == doctest::Approx(rows[i].val_leakage).epsilon(1e-12));
    }
}

TEST_CASE("trainlog parser names the offending line") {
    const std::string header =
        "epoch,loss_kind,train_loss,mean_uc,val_mae,val_rmse,val_leakage\n";
    CHECK_THROWS_WITH_AS(parse_trainlog_csv("epoch,nope\n1,2\n", "log.csv"),
                         doctest::Contains("log.csv, line 1"), parse_error);
    CHECK_THROWS_WITH_AS(parse_trainlog_csv(header, "log.csv"),
                         doctest::Contains("no data rows"), parse_error);
    CHECK_THROWS_WITH_AS(parse_trainlog_csv(header + "0,fmse,1,1\n", "log.csv"),
                         doctest::Contains("line 2"), parse_error);
    CHECK_THROWS_WITH_AS(parse_trainlog_csv(header + "0,fmse,1,1,nan!,1,1\n", "log.csv"),
                         doctest::Contains("nan!"), parse_error);
    CHECK_THROWS_WITH_AS(parse_trainlog_csv(header + "0,huber,1,1,1,1,1\n", "log.csv"),
                         doctest::Contains("huber"), parse_error);
    CHECK_THROWS_WITH_AS(parse_trainlog_csv(header + "-1,mse,1,1,1,1,1\n", "log.csv"),
                         doctest::Contains("epoch"), parse_error);
    CHECK_THROWS_AS(parse_trainlog_csv("", "log.csv"), parse_error);
}

TEST_CASE("trainlog parser tolerates CRLF and trailing blank lines") {
    const std::string text =
        "epoch,loss_kind,train_loss,mean_uc,val_mae,val_rmse,val_leakage\r\n"
        "0,mse,1,1,2,3,0.5\r\n\n";
    const std::vector<TrainLogRow> rows = parse_trainlog_csv(text, "mem");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].val_rmse == 3.0);
}

TEST_CASE("chart output is byte deterministic") {
    const std::vector<TrainLogRow> rows = sample_rows(12);
    const std::vector<PlotSeries> series = {series_from(rows, "run_a"),
                                            series_from(rows, "run_b")};
    const std::string a = render_line_chart("validation MAE by epoch", "MAE", series);
    const std::string b = render_line_chart("validation MAE by epoch", "MAE", series);
    CHECK(a == b);
}

TEST_CASE("chart carries one polyline per series with every point") {
    const std::vector<TrainLogRow> rows = sample_rows(60);
    const std::vector<PlotSeries> series = {series_from(rows, "full"),
                                            series_from(rows, "baseline")};
    const std::string svg = render_line_chart("t", "MAE", series);
    CHECK(count_occurrences(svg, "<polyline") == 2);
    // 60 points means 60 "x,y" pairs in the first polyline.
    const std::size_t start = svg.find("points=\"");
    const std::size_t end = svg.find('"', start + 8);
    const std::string points = svg.substr(start + 8, end - start - 8);
    CHECK(count_occurrences(points, ",") == 60);
    CHECK(svg.find(">full</text>") != std::string::npos);
    CHECK(svg.find(">baseline</text>") != std::string::npos);
}

TEST_CASE("single-point series renders as a dot") {
    PlotSeries s;
    s.label = "one";
    s.x = {0.0};
    s.y = {2.0};
    const std::string svg = render_line_chart("t", "MAE", {s});
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(count_occurrences(svg, "<polyline") == 0);
}

TEST_CASE("labels are xml escaped") {
    PlotSeries s = series_from(sample_rows(3), "a<b&c");
    const std::string svg = render_line_chart("x<y", "MAE", {s});
    CHECK(svg.find("a&lt;b&amp;c") != std::string::npos);
    CHECK(svg.find("x&lt;y") != std::string::npos);
    CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("chart rejects malformed series") {
    CHECK_THROWS_AS(render_line_chart("t", "y", {}), contract_error);

    PlotSeries empty;
    empty.label = "e";
    CHECK_THROWS_AS(render_line_chart("t", "y", {empty}), contract_error);

    PlotSeries ragged;
    ragged.label = "r";
    ragged.x = {0.0, 1.0};
    ragged.y = {1.0};
    CHECK_THROWS_AS(render_line_chart("t", "y", {ragged}), contract_error);

    PlotSeries inf;
    inf.label = "i";
    inf.x = {0.0};
    inf.y = {std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(render_line_chart("t", "y", {inf}), contract_error);
}

TEST_CASE("all-zero series still produces a valid axis") {
    PlotSeries s;
    s.label = "flat";
    s.x = {0.0, 1.0, 2.0};
    s.y = {0.0, 0.0, 0.0};
    const std::string svg = render_line_chart("t", "leakage", {s});
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
}
