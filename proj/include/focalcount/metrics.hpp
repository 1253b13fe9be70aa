#pragma once

#include <cstddef>
#include <vector>

#include "focalcount/synthgen.hpp"

namespace focalcount {

// (1/N) sum |pred - gt| over paired counts.
double mae(const std::vector<double>& preds, const std::vector<double>& gts);

// sqrt((1/N) sum (pred - gt)^2); never below mae on the same input.
double rmse(const std::vector<double>& preds, const std::vector<double>& gts);

// Over-counting diagnostic: mean over scenes holding non-specified objects of
// max(0, pred - specified count) / non-specified count. 0 means the model
// counted only the prompted category, 1 that it counted everything. Requires
// at least one qualifying scene. Under-counting is clamped away; it shows up
// in mae instead.
double leakage(const std::vector<Scene>& scenes, const std::vector<double>& preds);

struct SceneEval {
    double pred = 0.0;
    double gt_specified = 0.0;
    std::size_t gt_nonspecified = 0;
};

struct EvalReport {
    double mae = 0.0;
    double rmse = 0.0;
    double leakage = 0.0;
    std::vector<SceneEval> per_scene;
};

// Spearman rank correlation with midranks for ties. Undefined (contract
// error) when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

} // namespace focalcount
