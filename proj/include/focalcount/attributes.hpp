#pragma once

#include <array>
#include <vector>

#include "focalcount/rng.hpp"
#include "focalcount/tensor.hpp"

namespace focalcount {

// Per-image attribute values. Raw fields come straight out of the compute_*
// functions; the normalized fields are filled by normalize_attributes and lie
// in [0,1].
struct AttributeTriple {
    double entropy_raw = 0.0;
    double offset_raw = 0.0;
    double inv_certainty_raw = 0.0;
    double entropy = 0.0;
    double offset = 0.0;
    double inv_certainty = 0.0;
};

struct DirichletParams {
    std::array<double, 3> alpha{1.0, 1.0, 1.0};
};

// Convex weights over (entropy, offset, inv_certainty); sums to 1.
struct WeightVector {
    std::array<double, 3> w{};
};

// How the activation sum is reduced to a mean before the sigmoid squash:
// Spatial divides by H*W, Full by H*W*C.
enum class CertaintyNorm { Spatial, Full };

// Shannon entropy, in nats, summed over every element of a [C,H,W] map whose
// values are treated as independent Bernoulli parameters. Values are clamped
// to [1e-7, 1 - 1e-7] before the logs.
double compute_entropy(const Tensor& f);

// |column centroid - (W-1)/2| of the mass in f, 0-based columns, single
// centroid over all channels. Rejects maps whose total mass is <= 1e-12.
double compute_offset(const Tensor& f);

// 1 - sigmoid(mean activation magnitude). Larger when the map is quiet, so
// this is an inverted certainty. norm picks the denominator of the mean.
double compute_certainty(const Tensor& f, CertaintyNorm norm = CertaintyNorm::Full);

AttributeTriple compute_raw_attributes(const Tensor& f,
                                       CertaintyNorm norm = CertaintyNorm::Full);

// Min-max normalizes each raw attribute across the batch into [0,1]. An
// attribute that is constant over the batch maps to 0.5 everywhere.
void normalize_attributes(std::vector<AttributeTriple>& batch);

// w_k = Gamma(alpha_k, 1) draws normalized to the simplex.
WeightVector sample_dirichlet(const DirichletParams& params, Rng& rng);

// U = w1*entropy + w2*offset + w3*inv_certainty for a normalized triple.
double combine_weight(const AttributeTriple& triple, const WeightVector& w);

} // namespace focalcount
