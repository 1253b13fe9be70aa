#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "focalcount/attributes.hpp"
#include "focalcount/losses.hpp"
#include "focalcount/metrics.hpp"
#include "focalcount/model.hpp"
#include "focalcount/synthgen.hpp"

namespace focalcount {

// Which attribute combination forms the per-image weight. Dirichlet draws a
// fresh simplex point; the others are fixed corners or the equal mix.
enum class WeightMode { Dirichlet, EntropyOnly, OffsetOnly, CertaintyOnly, Average };

enum class DirichletCadence { Step, Epoch, Run };

// Both: weights apply in both curriculum phases. Late: only once the loss
// has switched to plain MSE.
enum class WeightPhase { Both, Late };

enum class AttributeNormalization { MinMax, None };

struct ExperimentConfig {
    std::size_t n = 512;
    double single_category_fraction = 0.9;
    std::size_t epochs = 60;
    std::size_t switch_epoch_t = 20;
    std::size_t batch_size = 16;
    double learning_rate = 1e-2;
    double lr_decay_factor = 0.33;
    std::size_t lr_decay_epoch = 20;
    std::array<double, 3> alpha{1.0, 1.0, 1.0};
    std::uint64_t corpus_seed = 1;
    std::uint64_t init_seed = 2;
    std::uint64_t dirichlet_seed = 3;
    bool use_uc = true;
    bool use_es = true;
    bool use_mse = true;
    CertaintyNorm certainty_norm = CertaintyNorm::Full;
    AttributeNormalization attribute_normalization = AttributeNormalization::MinMax;
    WeightMode weight_mode = WeightMode::Dirichlet;
    DirichletCadence dirichlet_cadence = DirichletCadence::Step;
    WeightPhase weight_phase = WeightPhase::Both;
    bool weight_mean_one = true;
    double es_clamp_eps = 1e-7;
    std::string out_dir;
};

// Enforces the config invariants (t <= E, batch_size <= n, positive rates,
// valid flag combinations). Throws contract_error.
void validate_config(const ExperimentConfig& config);

// Round trip between ExperimentConfig and the key = value text format. Keys
// are exactly the field names; unknown keys and bad values raise parse_error
// naming the offender.
std::string config_text(const ExperimentConfig& config);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);

struct TrainLogRow {
    std::size_t epoch = 0;
    LossKind kind = LossKind::MSE;
    double train_loss = 0.0;
    double mean_uc = 0.0;
    double val_mae = 0.0;
    double val_rmse = 0.0;
    double val_leakage = 0.0;
};

std::string trainlog_csv(const std::vector<TrainLogRow>& rows);

struct TrainResult {
    std::vector<TrainLogRow> log;
    CounterParams params;
    EvalReport final_eval;
};

// Forwards every scene and scores the count predictions.
EvalReport evaluate(const CounterParams& params, const std::vector<Scene>& scenes);

// Effective per-image weights for one batch. triples carry raw attribute
// values; normalization and the use_uc/phase/mean-one transforms happen
// here. mean_uc_out receives the pre-rescale mean of the weights actually
// applied (1.0 when weighting is off for this batch).
std::vector<double> compute_batch_weights(std::vector<AttributeTriple> triples,
                                          const WeightVector& w, bool weighting_active,
                                          AttributeNormalization normalization,
                                          bool weight_mean_one, double* mean_uc_out);

// Full training run on generated corpora (train: n scenes at the configured
// fraction; held-out eval: max(2, n/4) scenes at fraction 0.5, disjoint
// seeds). Deterministic given the config.
TrainResult run_experiment(const ExperimentConfig& config);

// Same loop on caller-supplied corpora; used by tests.
TrainResult run_experiment(const ExperimentConfig& config, const std::vector<Scene>& train_corpus,
                           const std::vector<Scene>& eval_corpus);

struct AblationCell {
    double mae = 0.0;
    double rmse = 0.0;
    double leakage = 0.0;
};

struct AblationRow {
    std::string label;
    ExperimentConfig config;  // seeds of the first repetition
    std::string config_hash;
    std::vector<AblationCell> per_seed;
    AblationCell mean;
    AblationCell stddev;
};

// The component rows (mse, mse+uc, fmse, fmse+uc) and the weighting rows
// (entropy / offset / certainty corners, equal average, Dirichlet), each run
// over `seeds` derived seed sets.
std::vector<AblationRow> run_ablation_matrix(const ExperimentConfig& base, std::size_t seeds);

std::string ablation_csv(const std::vector<AblationRow>& rows);

} // namespace focalcount
