#include "focalcount/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "focalcount/errors.hpp"

namespace focalcount {

namespace {

constexpr double kEntropyClamp = 1e-7;

void check_chw(const Tensor& f, const char* who) {
    if (f.rank() != 3) {
        throw dimension_error(std::string(who) + ": feature map must be [C,H,W], got " +
                              shape_string(f.shape()));
    }
}

double squash(double mu) {
    return 1.0 / (1.0 + std::exp(-mu));
}

} // namespace

double compute_entropy(const Tensor& f) {
    check_chw(f, "compute_entropy");
    require_finite(f, "compute_entropy");
    const double* p = f.data();
    double acc = 0.0;
    for (std::size_t i = 0, n = f.size(); i < n; ++i) {
        const double v = std::clamp(p[i], kEntropyClamp, 1.0 - kEntropyClamp);
        acc -= v * std::log(v) + (1.0 - v) * std::log(1.0 - v);
    }
    return acc;
}

double compute_offset(const Tensor& f) {
    check_chw(f, "compute_offset");
    require_finite(f, "compute_offset");
    const std::size_t c = f.dim(0), h = f.dim(1), w = f.dim(2);
    const double* p = f.data();
    double mass = 0.0, moment = 0.0;
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t hi = 0; hi < h; ++hi) {
            const double* row = p + (ci * h + hi) * w;
            for (std::size_t wi = 0; wi < w; ++wi) {
                mass += row[wi];
                moment += static_cast<double>(wi) * row[wi];
            }
        }
    }
    if (mass <= 1e-12) {
        throw degenerate_input_error("compute_offset: total mass " + std::to_string(mass) +
                                     " is too small for a centroid");
    }
    const double center = (static_cast<double>(w) - 1.0) / 2.0;
    return std::fabs(moment / mass - center);
}

double compute_certainty(const Tensor& f, CertaintyNorm norm) {
    check_chw(f, "compute_certainty");
    require_finite(f, "compute_certainty");
    const double* p = f.data();
    double s = 0.0;
    for (std::size_t i = 0, n = f.size(); i < n; ++i) s += std::fabs(p[i]);
    const double spatial = static_cast<double>(f.dim(1) * f.dim(2));
    const double denom = norm == CertaintyNorm::Spatial
                             ? spatial
                             : spatial * static_cast<double>(f.dim(0));
    return 1.0 - squash(s / denom);
}

AttributeTriple compute_raw_attributes(const Tensor& f, CertaintyNorm norm) {
    AttributeTriple t;
    t.entropy_raw = compute_entropy(f);
    t.offset_raw = compute_offset(f);
    t.inv_certainty_raw = compute_certainty(f, norm);
    return t;
}

void normalize_attributes(std::vector<AttributeTriple>& batch) {
    if (batch.empty()) throw contract_error("normalize_attributes: batch must not be empty");

    const auto normalize_field = [&](double AttributeTriple::*raw, double AttributeTriple::*out) {
        double lo = batch.front().*raw, hi = batch.front().*raw;
        for (const AttributeTriple& t : batch) {
            lo = std::min(lo, t.*raw);
            hi = std::max(hi, t.*raw);
        }
        const double span = hi - lo;
        for (AttributeTriple& t : batch) {
            t.*out = span <= 1e-12 ? 0.5 : (t.*raw - lo) / span;
        }
    };
    normalize_field(&AttributeTriple::entropy_raw, &AttributeTriple::entropy);
    normalize_field(&AttributeTriple::offset_raw, &AttributeTriple::offset);
    normalize_field(&AttributeTriple::inv_certainty_raw, &AttributeTriple::inv_certainty);
}

WeightVector sample_dirichlet(const DirichletParams& params, Rng& rng) {
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(params.alpha[k] > 0.0)) {
            throw contract_error("sample_dirichlet: alpha[" + std::to_string(k) +
                                 "] must be positive");
        }
    }
    WeightVector wv;
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        wv.w[k] = rng.gamma(params.alpha[k]);
        total += wv.w[k];
    }
    for (std::size_t k = 0; k < 3; ++k) wv.w[k] /= total;
    return wv;
}

double combine_weight(const AttributeTriple& triple, const WeightVector& w) {
    const double fields[3] = {triple.entropy, triple.offset, triple.inv_certainty};
    double wsum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (fields[k] < 0.0 || fields[k] > 1.0) {
            throw contract_error("combine_weight: attribute " + std::to_string(k) +
                                 " = " + std::to_string(fields[k]) +
                                 " is outside [0,1]; normalize the batch first");
        }
        if (w.w[k] < 0.0) {
            throw contract_error("combine_weight: weight " + std::to_string(k) + " is negative");
        }
        wsum += w.w[k];
    }
    if (std::fabs(wsum - 1.0) > 1e-9) {
        throw contract_error("combine_weight: weights sum to " + std::to_string(wsum) +
                             ", expected 1");
    }
    return w.w[0] * fields[0] + w.w[1] * fields[1] + w.w[2] * fields[2];
}

} // namespace focalcount
