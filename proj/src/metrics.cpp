#include "focalcount/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "focalcount/errors.hpp"

namespace focalcount {

namespace {

void check_paired(const std::vector<double>& preds, const std::vector<double>& gts,
                  const char* who) {
    if (preds.empty()) throw contract_error(std::string(who) + ": empty input");
    if (preds.size() != gts.size()) {
        throw contract_error(std::string(who) + ": length mismatch (" +
                             std::to_string(preds.size()) + " vs " + std::to_string(gts.size()) +
                             ")");
    }
}

std::vector<double> midranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double mae(const std::vector<double>& preds, const std::vector<double>& gts) {
    check_paired(preds, gts, "mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) acc += std::fabs(preds[i] - gts[i]);
    return acc / static_cast<double>(preds.size());
}

double rmse(const std::vector<double>& preds, const std::vector<double>& gts) {
    check_paired(preds, gts, "rmse");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double d = preds[i] - gts[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(preds.size()));
}

double leakage(const std::vector<Scene>& scenes, const std::vector<double>& preds) {
    if (scenes.size() != preds.size()) {
        throw contract_error("leakage: scene/prediction length mismatch (" +
                             std::to_string(scenes.size()) + " vs " +
                             std::to_string(preds.size()) + ")");
    }
    double acc = 0.0;
    std::size_t qualifying = 0;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const std::size_t other = scenes[i].nonspecified_count();
        if (other == 0) continue;
        const double spill =
            std::max(0.0, preds[i] - static_cast<double>(scenes[i].specified_count()));
        acc += spill / static_cast<double>(other);
        ++qualifying;
    }
    if (qualifying == 0) {
        throw contract_error("leakage: no scene with non-specified objects");
    }
    return acc / static_cast<double>(qualifying);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    check_paired(x, y, "spearman");
    if (x.size() < 2) throw contract_error("spearman: need at least 2 points");
    const std::vector<double> rx = midranks(x);
    const std::vector<double> ry = midranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        throw contract_error("spearman: correlation undefined for constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace focalcount
