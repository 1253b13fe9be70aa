#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "focalcount/tensor.hpp"

namespace focalcount {

inline constexpr std::size_t kMaxCategories = 5;

// Fixed appearance palette. Any two signatures differ by at least 0.3 in
// some channel so categories stay separable at toy resolution.
const std::array<double, 3>& category_signature(std::size_t id);

// Largest per-category blob count drawn when a corpus scene has k categories.
// Falls as k grows so scenes stay placeable and single-category scenes carry
// the highest specified counts.
std::size_t category_count_cap(std::size_t k);

// Deterministic recipe for one scene. Categories are the palette prefix
// {0..num_categories-1}; specified_category indexes into it.
struct SceneSpec {
    std::size_t image_size = 32;
    std::size_t num_categories = 1;
    std::vector<std::size_t> counts;  // one entry per category, each in [1,12]
    std::size_t specified_category = 0;
    double blob_sigma = 1.5;
    std::uint64_t seed = 0;
};

struct Scene {
    SceneSpec spec;
    Tensor image;       // [4,S,S]: 3 appearance channels + constant prompt channel
    Tensor gt_density;  // [S,S]; integrates to the specified-category count
    std::vector<std::size_t> counts;
    std::size_t total_count = 0;

    std::size_t specified_count() const { return counts[spec.specified_category]; }
    std::size_t nonspecified_count() const { return total_count - specified_count(); }
};

// Renders the scene described by spec. Blob centers keep a minimum mutual
// distance of 3*blob_sigma; each ground-truth kernel is renormalized to unit
// in-image mass. Throws placement_error if a blob cannot be placed within
// 1000 rejection attempts.
Scene generate_scene(const SceneSpec& spec);

// n scenes; round(n * single_category_fraction) of them have one category,
// the rest draw the category count uniformly from {2..5}. Scene recipes are
// derived from (seed, index) only, so generation order is irrelevant.
std::vector<Scene> generate_corpus(std::size_t n, double single_category_fraction,
                                   std::uint64_t seed);

// The 3 appearance channels as a standalone [3,S,S] map, the hand-built
// feature stand-in used for attribute trend analysis.
Tensor appearance_map(const Scene& scene);

// One CSV record per scene: recipe fields plus per-category counts. Images
// are regenerable from the seeds, so no raster data is written.
std::string corpus_csv(const std::vector<Scene>& corpus);

} // namespace focalcount
