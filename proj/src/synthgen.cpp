#include "focalcount/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "focalcount/errors.hpp"
#include "focalcount/rng.hpp"

namespace focalcount {

namespace {

constexpr std::array<std::array<double, 3>, kMaxCategories> kPalette{{
    {0.90, 0.20, 0.20},
    {0.20, 0.85, 0.30},
    {0.25, 0.35, 0.95},
    {0.80, 0.75, 0.20},
    {0.55, 0.25, 0.80},
}};

constexpr std::array<std::size_t, kMaxCategories> kCountCaps{8, 6, 5, 5, 4};

constexpr double kEdgeMargin = 2.0;
constexpr int kPlacementAttempts = 1000;

struct Placement {
    double x = 0.0;
    double y = 0.0;
    std::size_t category = 0;
};

void validate_spec(const SceneSpec& spec) {
    if (spec.image_size < 8) {
        throw contract_error("generate_scene: image_size must be >= 8, got " +
                             std::to_string(spec.image_size));
    }
    if (spec.num_categories < 1 || spec.num_categories > kMaxCategories) {
        throw contract_error("generate_scene: num_categories must be in [1," +
                             std::to_string(kMaxCategories) + "], got " +
                             std::to_string(spec.num_categories));
    }
    if (spec.counts.size() != spec.num_categories) {
        throw contract_error("generate_scene: counts has " + std::to_string(spec.counts.size()) +
                             " entries for " + std::to_string(spec.num_categories) +
                             " categories");
    }
    for (std::size_t c : spec.counts) {
        if (c < 1 || c > 12) {
            throw contract_error("generate_scene: per-category count " + std::to_string(c) +
                                 " is outside [1,12]");
        }
    }
    if (spec.specified_category >= spec.num_categories) {
        throw contract_error("generate_scene: specified_category " +
                             std::to_string(spec.specified_category) + " is out of range");
    }
    if (!(spec.blob_sigma > 0.0)) {
        throw contract_error("generate_scene: blob_sigma must be positive");
    }
}

} // namespace

const std::array<double, 3>& category_signature(std::size_t id) {
    if (id >= kMaxCategories) {
        throw contract_error("category_signature: id " + std::to_string(id) + " is out of range");
    }
    return kPalette[id];
}

std::size_t category_count_cap(std::size_t k) {
    if (k < 1 || k > kMaxCategories) {
        throw contract_error("category_count_cap: k " + std::to_string(k) + " is out of range");
    }
    return kCountCaps[k - 1];
}

Scene generate_scene(const SceneSpec& spec) {
    validate_spec(spec);
    Rng rng(spec.seed);
    const std::size_t s = spec.image_size;
    const double center = (static_cast<double>(s) - 1.0) / 2.0;
    const double min_dist = 3.0 * spec.blob_sigma;
    const double lo = kEdgeMargin, hi = static_cast<double>(s) - 1.0 - kEdgeMargin;

    // Scene layout: the first category clusters near the image center; every
    // further category sits on a ring whose radius grows with the category
    // count, all on one randomly chosen side. The column centroid therefore
    // drifts further from the center the more categories a scene has.
    const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double k_real = static_cast<double>(spec.num_categories);
    const double ring = 3.0 + 1.3 * k_real;

    std::vector<std::array<double, 2>> anchors(spec.num_categories);
    anchors[0] = {center + rng.uniform_in(-2.0, 2.0), center + rng.uniform_in(-2.0, 2.0)};
    for (std::size_t j = 1; j < spec.num_categories; ++j) {
        const double phi = rng.uniform_in(-1.0471975511965976, 1.0471975511965976);  // +-60 deg
        const double r = ring + rng.uniform_in(-1.5, 1.5);
        anchors[j] = {center + side * r * std::cos(phi), center + r * std::sin(phi)};
    }

    std::vector<Placement> blobs;
    blobs.reserve(64);
    for (std::size_t j = 0; j < spec.num_categories; ++j) {
        const double base_spread =
            std::min(2.0 + 0.5 * static_cast<double>(spec.counts[j]), 5.5);
        for (std::size_t b = 0; b < spec.counts[j]; ++b) {
            bool placed = false;
            for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
                // Widen the cluster every 150 rejections so dense clusters
                // can still satisfy the spacing rule.
                const double spread = base_spread * std::pow(1.25, attempt / 150);
                const double x = anchors[j][0] + spread * rng.normal();
                const double y = anchors[j][1] + spread * rng.normal();
                if (x < lo || x > hi || y < lo || y > hi) continue;
                bool ok = true;
                for (const Placement& p : blobs) {
                    const double dx = p.x - x, dy = p.y - y;
                    if (dx * dx + dy * dy < min_dist * min_dist) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                blobs.push_back({x, y, j});
                placed = true;
                break;
            }
            if (!placed) {
                throw placement_error("generate_scene: no valid position for category " +
                                      std::to_string(j) + " blob " + std::to_string(b) +
                                      " after " + std::to_string(kPlacementAttempts) +
                                      " attempts (seed " + std::to_string(spec.seed) + ")");
            }
        }
    }

    Scene scene;
    scene.spec = spec;
    scene.image = Tensor({4, s, s});
    scene.gt_density = Tensor({s, s});
    scene.counts = spec.counts;
    scene.total_count = 0;
    for (std::size_t c : spec.counts) scene.total_count += c;

    const double radius = 3.0 * spec.blob_sigma;
    const double inv_two_sigma_sq = 1.0 / (2.0 * spec.blob_sigma * spec.blob_sigma);
    double* img = scene.image.data();
    double* gt = scene.gt_density.data();

    for (const Placement& blob : blobs) {
        const auto& sig = kPalette[blob.category];
        const long x0 = std::max(0L, static_cast<long>(std::ceil(blob.x - radius)));
        const long x1 = std::min(static_cast<long>(s) - 1, static_cast<long>(std::floor(blob.x + radius)));
        const long y0 = std::max(0L, static_cast<long>(std::ceil(blob.y - radius)));
        const long y1 = std::min(static_cast<long>(s) - 1, static_cast<long>(std::floor(blob.y + radius)));

        // Pass 1: truncated kernel mass, for unit renormalization.
        double mass = 0.0;
        for (long y = y0; y <= y1; ++y) {
            for (long x = x0; x <= x1; ++x) {
                const double dx = static_cast<double>(x) - blob.x;
                const double dy = static_cast<double>(y) - blob.y;
                const double d2 = dx * dx + dy * dy;
                if (d2 > radius * radius) continue;
                mass += std::exp(-d2 * inv_two_sigma_sq);
            }
        }
        // The window always contains at least the pixel under the center.
        for (long y = y0; y <= y1; ++y) {
            for (long x = x0; x <= x1; ++x) {
                const double dx = static_cast<double>(x) - blob.x;
                const double dy = static_cast<double>(y) - blob.y;
                const double d2 = dx * dx + dy * dy;
                if (d2 > radius * radius) continue;
                const double g = std::exp(-d2 * inv_two_sigma_sq);
                const std::size_t px = static_cast<std::size_t>(y) * s + static_cast<std::size_t>(x);
                for (std::size_t ch = 0; ch < 3; ++ch) img[ch * s * s + px] += sig[ch] * g;
                if (blob.category == spec.specified_category) gt[px] += g / mass;
            }
        }
    }

    for (std::size_t i = 0; i < 3 * s * s; ++i) img[i] = std::clamp(img[i], 0.0, 1.0);
    const double prompt =
        static_cast<double>(spec.specified_category) / static_cast<double>(kMaxCategories - 1);
    for (std::size_t i = 0; i < s * s; ++i) img[3 * s * s + i] = prompt;

    require_finite(scene.image, "generate_scene image");
    require_finite(scene.gt_density, "generate_scene gt_density");
    return scene;
}

std::vector<Scene> generate_corpus(std::size_t n, double single_category_fraction,
                                   std::uint64_t seed) {
    if (n < 1) throw contract_error("generate_corpus: n must be >= 1");
    if (!(single_category_fraction >= 0.0 && single_category_fraction <= 1.0)) {
        throw contract_error("generate_corpus: single_category_fraction must be in [0,1]");
    }
    const std::size_t singles = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * single_category_fraction));

    std::vector<Scene> corpus;
    corpus.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng draw(mix_seed(seed, 2 * i));
        SceneSpec spec;
        spec.num_categories = i < singles ? 1 : 2 + draw.index(kMaxCategories - 1);
        const std::size_t cap = category_count_cap(spec.num_categories);
        spec.counts.resize(spec.num_categories);
        for (std::size_t j = 0; j < spec.num_categories; ++j) spec.counts[j] = 1 + draw.index(cap);
        spec.specified_category = draw.index(spec.num_categories);
        spec.seed = mix_seed(seed, 2 * i + 1);
        corpus.push_back(generate_scene(spec));
    }
    return corpus;
}

Tensor appearance_map(const Scene& scene) {
    const std::size_t s = scene.spec.image_size;
    Tensor out({3, s, s});
    for (std::size_t i = 0; i < 3 * s * s; ++i) out.at(i) = scene.image.at(i);
    return out;
}

std::string corpus_csv(const std::vector<Scene>& corpus) {
    std::ostringstream os;
    os << "index,seed,image_size,num_categories,specified_category,blob_sigma,counts\n";
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const SceneSpec& sp = corpus[i].spec;
        os << i << ',' << sp.seed << ',' << sp.image_size << ',' << sp.num_categories << ','
           << sp.specified_category << ',' << sp.blob_sigma << ',';
        for (std::size_t j = 0; j < sp.counts.size(); ++j) {
            if (j) os << ';';
            os << sp.counts[j];
        }
        os << '\n';
    }
    return os.str();
}

} // namespace focalcount
