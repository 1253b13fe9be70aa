#include "focalcount/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "focalcount/errors.hpp"
#include "focalcount/rng.hpp"

namespace focalcount {

namespace {

constexpr std::uint64_t kEvalCorpusSalt = 424242;
constexpr std::uint64_t kShuffleSalt = 7001;

const char* certainty_norm_name(CertaintyNorm v) {
    return v == CertaintyNorm::Spatial ? "spatial" : "full";
}
const char* normalization_name(AttributeNormalization v) {
    return v == AttributeNormalization::MinMax ? "minmax" : "none";
}
const char* weight_mode_name(WeightMode v) {
    switch (v) {
        case WeightMode::Dirichlet: return "dirichlet";
        case WeightMode::EntropyOnly: return "entropy";
        case WeightMode::OffsetOnly: return "offset";
        case WeightMode::CertaintyOnly: return "certainty";
        case WeightMode::Average: return "average";
    }
    return "dirichlet";
}
const char* cadence_name(DirichletCadence v) {
    switch (v) {
        case DirichletCadence::Step: return "step";
        case DirichletCadence::Epoch: return "epoch";
        case DirichletCadence::Run: return "run";
    }
    return "step";
}
const char* phase_name(WeightPhase v) {
    return v == WeightPhase::Late ? "late" : "both";
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_metric(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw parse_error("config key '" + key + "': cannot parse value '" + value + "'");
}

double parse_double_value(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) bad_value(key, value);
        return v;
    } catch (const parse_error&) {
        throw;
    } catch (...) {
        bad_value(key, value);
    }
}

std::size_t parse_size_value(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size() || v < 0) bad_value(key, value);
        return static_cast<std::size_t>(v);
    } catch (const parse_error&) {
        throw;
    } catch (...) {
        bad_value(key, value);
    }
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) bad_value(key, value);
        return static_cast<std::uint64_t>(v);
    } catch (const parse_error&) {
        throw;
    } catch (...) {
        bad_value(key, value);
    }
}

bool parse_bool_value(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value);
}

std::array<double, 3> parse_alpha_value(const std::string& key, const std::string& value) {
    std::string body = value;
    if (body.size() >= 2 && body.front() == '[' && body.back() == ']') {
        body = body.substr(1, body.size() - 2);
    }
    std::array<double, 3> out{};
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t comma = body.find(',', pos);
        const bool last = k == 2;
        if (last != (comma == std::string::npos)) bad_value(key, value);
        const std::string piece = body.substr(pos, last ? std::string::npos : comma - pos);
        out[k] = parse_double_value(key, piece);
        pos = last ? body.size() : comma + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

void validate_config(const ExperimentConfig& c) {
    if (c.n < 1) throw contract_error("config: n must be >= 1");
    if (c.batch_size < 1 || c.batch_size > c.n) {
        throw contract_error("config: batch_size must be in [1, n]");
    }
    if (c.switch_epoch_t > c.epochs) {
        throw contract_error("config: switch_epoch_t (" + std::to_string(c.switch_epoch_t) +
                             ") must not exceed epochs (" + std::to_string(c.epochs) + ")");
    }
    if (!(c.learning_rate > 0.0)) throw contract_error("config: learning_rate must be positive");
    if (!(c.lr_decay_factor > 0.0)) {
        throw contract_error("config: lr_decay_factor must be positive");
    }
    if (!(c.single_category_fraction >= 0.0 && c.single_category_fraction <= 1.0)) {
        throw contract_error("config: single_category_fraction must be in [0,1]");
    }
    for (double a : c.alpha) {
        if (!(a > 0.0)) throw contract_error("config: alpha entries must be positive");
    }
    if (!(c.es_clamp_eps > 0.0 && c.es_clamp_eps < 0.5)) {
        throw contract_error("config: es_clamp_eps must be in (0, 0.5)");
    }
    if (!c.use_mse && !c.use_es) {
        throw contract_error("config: at least one of use_mse, use_es must be true");
    }
}

std::string config_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "n = " << c.n << '\n';
    os << "single_category_fraction = " << fmt_double(c.single_category_fraction) << '\n';
    os << "epochs = " << c.epochs << '\n';
    os << "switch_epoch_t = " << c.switch_epoch_t << '\n';
    os << "batch_size = " << c.batch_size << '\n';
    os << "learning_rate = " << fmt_double(c.learning_rate) << '\n';
    os << "lr_decay_factor = " << fmt_double(c.lr_decay_factor) << '\n';
    os << "lr_decay_epoch = " << c.lr_decay_epoch << '\n';
    os << "alpha = [" << fmt_double(c.alpha[0]) << ',' << fmt_double(c.alpha[1]) << ','
       << fmt_double(c.alpha[2]) << "]\n";
    os << "corpus_seed = " << c.corpus_seed << '\n';
    os << "init_seed = " << c.init_seed << '\n';
    os << "dirichlet_seed = " << c.dirichlet_seed << '\n';
    os << "use_uc = " << (c.use_uc ? "true" : "false") << '\n';
    os << "use_es = " << (c.use_es ? "true" : "false") << '\n';
    os << "use_mse = " << (c.use_mse ? "true" : "false") << '\n';
    os << "certainty_norm = " << certainty_norm_name(c.certainty_norm) << '\n';
    os << "attribute_normalization = " << normalization_name(c.attribute_normalization) << '\n';
    os << "weight_mode = " << weight_mode_name(c.weight_mode) << '\n';
    os << "dirichlet_cadence = " << cadence_name(c.dirichlet_cadence) << '\n';
    os << "weight_phase = " << phase_name(c.weight_phase) << '\n';
    os << "weight_mean_one = " << (c.weight_mean_one ? "true" : "false") << '\n';
    os << "es_clamp_eps = " << fmt_double(c.es_clamp_eps) << '\n';
    os << "out_dir = " << c.out_dir << '\n';
    return os.str();
}

void apply_override(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "n") c.n = parse_size_value(key, value);
    else if (key == "single_category_fraction") c.single_category_fraction = parse_double_value(key, value);
    else if (key == "epochs") c.epochs = parse_size_value(key, value);
    else if (key == "switch_epoch_t") c.switch_epoch_t = parse_size_value(key, value);
    else if (key == "batch_size") c.batch_size = parse_size_value(key, value);
    else if (key == "learning_rate") c.learning_rate = parse_double_value(key, value);
    else if (key == "lr_decay_factor") c.lr_decay_factor = parse_double_value(key, value);
    else if (key == "lr_decay_epoch") c.lr_decay_epoch = parse_size_value(key, value);
    else if (key == "alpha") c.alpha = parse_alpha_value(key, value);
    else if (key == "corpus_seed") c.corpus_seed = parse_u64_value(key, value);
    else if (key == "init_seed") c.init_seed = parse_u64_value(key, value);
    else if (key == "dirichlet_seed") c.dirichlet_seed = parse_u64_value(key, value);
    else if (key == "use_uc") c.use_uc = parse_bool_value(key, value);
    else if (key == "use_es") c.use_es = parse_bool_value(key, value);
    else if (key == "use_mse") c.use_mse = parse_bool_value(key, value);
    else if (key == "certainty_norm") {
        if (value == "spatial") c.certainty_norm = CertaintyNorm::Spatial;
        else if (value == "full") c.certainty_norm = CertaintyNorm::Full;
        else bad_value(key, value);
    } else if (key == "attribute_normalization") {
        if (value == "minmax") c.attribute_normalization = AttributeNormalization::MinMax;
        else if (value == "none") c.attribute_normalization = AttributeNormalization::None;
        else bad_value(key, value);
    } else if (key == "weight_mode") {
        if (value == "dirichlet") c.weight_mode = WeightMode::Dirichlet;
        else if (value == "entropy") c.weight_mode = WeightMode::EntropyOnly;
        else if (value == "offset") c.weight_mode = WeightMode::OffsetOnly;
        else if (value == "certainty") c.weight_mode = WeightMode::CertaintyOnly;
        else if (value == "average") c.weight_mode = WeightMode::Average;
        else bad_value(key, value);
    } else if (key == "dirichlet_cadence") {
        if (value == "step") c.dirichlet_cadence = DirichletCadence::Step;
        else if (value == "epoch") c.dirichlet_cadence = DirichletCadence::Epoch;
        else if (value == "run") c.dirichlet_cadence = DirichletCadence::Run;
        else bad_value(key, value);
    } else if (key == "weight_phase") {
        if (value == "both") c.weight_phase = WeightPhase::Both;
        else if (value == "late") c.weight_phase = WeightPhase::Late;
        else bad_value(key, value);
    } else if (key == "weight_mean_one") {
        c.weight_mean_one = parse_bool_value(key, value);
    } else if (key == "es_clamp_eps") {
        c.es_clamp_eps = parse_double_value(key, value);
    } else if (key == "out_dir") {
        c.out_dir = value;
    } else {
        throw parse_error("config: unknown key '" + key + "'");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw parse_error("config line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_override(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw parse_error("config file not found: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

std::string trainlog_csv(const std::vector<TrainLogRow>& rows) {
    std::ostringstream os;
    os << "epoch,loss_kind,train_loss,mean_uc,val_mae,val_rmse,val_leakage\n";
    for (const TrainLogRow& r : rows) {
        os << r.epoch << ',' << loss_kind_name(r.kind) << ',' << fmt_metric(r.train_loss) << ','
           << fmt_metric(r.mean_uc) << ',' << fmt_metric(r.val_mae) << ','
           << fmt_metric(r.val_rmse) << ',' << fmt_metric(r.val_leakage) << '\n';
    }
    return os.str();
}

EvalReport evaluate(const CounterParams& params, const std::vector<Scene>& scenes) {
    if (scenes.empty()) throw contract_error("evaluate: no scenes");
    EvalReport report;
    std::vector<double> preds(scenes.size()), gts(scenes.size());
    report.per_scene.resize(scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const ForwardResult fr = forward(params, scenes[i].image);
        preds[i] = predict_count(fr.pred_density);
        gts[i] = static_cast<double>(scenes[i].specified_count());
        report.per_scene[i] = {preds[i], gts[i], scenes[i].nonspecified_count()};
    }
    report.mae = mae(preds, gts);
    report.rmse = rmse(preds, gts);
    report.leakage = leakage(scenes, preds);
    return report;
}

std::vector<double> compute_batch_weights(std::vector<AttributeTriple> triples,
                                          const WeightVector& w, bool weighting_active,
                                          AttributeNormalization normalization,
                                          bool weight_mean_one, double* mean_uc_out) {
    const std::size_t n = triples.size();
    if (n == 0) throw contract_error("compute_batch_weights: empty batch");
    std::vector<double> weights(n, 1.0);
    if (!weighting_active) {
        if (mean_uc_out) *mean_uc_out = 1.0;
        return weights;
    }

    if (normalization == AttributeNormalization::MinMax) {
        normalize_attributes(triples);
        for (std::size_t i = 0; i < n; ++i) weights[i] = combine_weight(triples[i], w);
    } else {
        // Raw attributes feed the mix directly; scale is arbitrary, which is
        // why this path is only sensible together with weight_mean_one.
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = w.w[0] * triples[i].entropy_raw + w.w[1] * triples[i].offset_raw +
                         w.w[2] * triples[i].inv_certainty_raw;
        }
    }

    double total = 0.0;
    for (double v : weights) total += v;
    if (mean_uc_out) *mean_uc_out = total / static_cast<double>(n);
    if (weight_mean_one) {
        if (total <= 1e-12) {
            std::fill(weights.begin(), weights.end(), 1.0);
        } else {
            const double scale = static_cast<double>(n) / total;
            for (double& v : weights) v *= scale;
        }
    }
    return weights;
}

namespace {

LossKind effective_kind(const CurriculumPolicy& policy, std::size_t epoch, bool use_es,
                        bool use_mse) {
    const LossKind k = select_loss(policy, epoch);
    if (k == LossKind::FMSE) {
        if (!use_es) return LossKind::MSE;
        if (!use_mse) return LossKind::ES;
    }
    return k;
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = rng.index(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

std::size_t worker_count() {
    const char* env = std::getenv("FOCALCOUNT_THREADS");
    if (!env) return 1;
    const long v = std::strtol(env, nullptr, 10);
    if (v < 1) return 1;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return std::min<std::size_t>(static_cast<std::size_t>(v), hw);
}

void axpy_into(Tensor& dst, const Tensor& src, double scale) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.at(i) += scale * src.at(i);
}

} // namespace

TrainResult run_experiment(const ExperimentConfig& config, const std::vector<Scene>& train_corpus,
                           const std::vector<Scene>& eval_corpus) {
    validate_config(config);
    if (train_corpus.empty()) throw contract_error("run_experiment: empty training corpus");
    if (eval_corpus.empty()) throw contract_error("run_experiment: empty eval corpus");

    CounterParams params = init_params(config.init_seed);
    const CurriculumPolicy policy{config.switch_epoch_t};
    const DirichletParams dpar{config.alpha};
    Rng dirichlet_rng(config.dirichlet_seed);

    WeightVector wv;
    switch (config.weight_mode) {
        case WeightMode::Dirichlet:
            if (config.dirichlet_cadence == DirichletCadence::Run) {
                wv = sample_dirichlet(dpar, dirichlet_rng);
            }
            break;
        case WeightMode::EntropyOnly: wv.w = {1.0, 0.0, 0.0}; break;
        case WeightMode::OffsetOnly: wv.w = {0.0, 1.0, 0.0}; break;
        case WeightMode::CertaintyOnly: wv.w = {0.0, 0.0, 1.0}; break;
        case WeightMode::Average: wv.w = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; break;
    }

    const std::size_t n = train_corpus.size();
    const std::size_t threads = worker_count();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    double lr = config.learning_rate;
    TrainResult result;
    result.log.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (epoch == config.lr_decay_epoch) lr *= config.lr_decay_factor;

        Rng shuffle_rng(mix_seed(mix_seed(config.corpus_seed, kShuffleSalt), epoch));
        shuffle_indices(order, shuffle_rng);

        if (config.weight_mode == WeightMode::Dirichlet &&
            config.dirichlet_cadence == DirichletCadence::Epoch) {
            wv = sample_dirichlet(dpar, dirichlet_rng);
        }

        const LossKind kind = effective_kind(policy, epoch, config.use_es, config.use_mse);
        const bool weighting_active =
            config.use_uc &&
            (config.weight_phase == WeightPhase::Both || epoch >= config.switch_epoch_t);

        double loss_sum = 0.0, uc_sum = 0.0;
        std::size_t batches = 0;

        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t m = std::min(config.batch_size, n - start);
            if (config.weight_mode == WeightMode::Dirichlet &&
                config.dirichlet_cadence == DirichletCadence::Step) {
                wv = sample_dirichlet(dpar, dirichlet_rng);
            }

            std::vector<Graph> graphs(m);
            std::vector<TapeForward> tapes(m);
            std::vector<Tensor> preds(m), gts(m);
            std::vector<AttributeTriple> triples(m);

            const auto forward_range = [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const Scene& scene = train_corpus[order[start + i]];
                    tapes[i] = forward_on_tape(graphs[i], params, scene.image);
                    const Tensor& p3 = graphs[i].value(tapes[i].pred);
                    preds[i] = p3.reshaped({p3.dim(1), p3.dim(2)});
                    gts[i] = scene.gt_density;
                    triples[i] = compute_raw_attributes(graphs[i].value(tapes[i].features),
                                                        config.certainty_norm);
                }
            };

            try {
                if (threads <= 1 || m < 2) {
                    forward_range(0, m);
                } else {
                    const std::size_t used = std::min(threads, m);
                    std::vector<std::thread> pool;
                    std::vector<std::exception_ptr> errors(used);
                    pool.reserve(used);
                    for (std::size_t t = 0; t < used; ++t) {
                        const std::size_t lo = m * t / used, hi = m * (t + 1) / used;
                        pool.emplace_back([&, t, lo, hi] {
                            try {
                                forward_range(lo, hi);
                            } catch (...) {
                                errors[t] = std::current_exception();
                            }
                        });
                    }
                    for (std::thread& th : pool) th.join();
                    for (const std::exception_ptr& err : errors) {
                        if (err) std::rethrow_exception(err);
                    }
                }

                double mean_uc = 1.0;
                std::vector<double> weights =
                    compute_batch_weights(triples, wv, weighting_active,
                                          config.attribute_normalization, config.weight_mean_one,
                                          &mean_uc);

                BatchLossResult bl =
                    batch_loss(preds, gts, weights, kind, config.es_clamp_eps);
                if (!std::isfinite(bl.value)) {
                    throw finite_value_error("batch loss is not finite");
                }
                loss_sum += bl.value;
                uc_sum += mean_uc;
                ++batches;

                CounterParams grads;
                grads.conv1_kernel = Tensor(params.conv1_kernel.shape());
                grads.conv1_bias = Tensor(params.conv1_bias.shape());
                grads.conv2_kernel = Tensor(params.conv2_kernel.shape());
                grads.conv2_bias = Tensor(params.conv2_bias.shape());
                grads.head_kernel = Tensor(params.head_kernel.shape());
                grads.head_bias = Tensor(params.head_bias.shape());

                for (std::size_t i = 0; i < m; ++i) {
                    if (weights[i] == 0.0) continue;  // zero weight, zero gradient
                    const Tensor seed =
                        bl.grads[i].reshaped(graphs[i].value(tapes[i].pred).shape());
                    graphs[i].backward(tapes[i].pred, seed);
                    axpy_into(grads.conv1_kernel, graphs[i].grad(tapes[i].conv1_kernel), 1.0);
                    axpy_into(grads.conv1_bias, graphs[i].grad(tapes[i].conv1_bias), 1.0);
                    axpy_into(grads.conv2_kernel, graphs[i].grad(tapes[i].conv2_kernel), 1.0);
                    axpy_into(grads.conv2_bias, graphs[i].grad(tapes[i].conv2_bias), 1.0);
                    axpy_into(grads.head_kernel, graphs[i].grad(tapes[i].head_kernel), 1.0);
                    axpy_into(grads.head_bias, graphs[i].grad(tapes[i].head_bias), 1.0);
                }

                axpy_into(params.conv1_kernel, grads.conv1_kernel, -lr);
                axpy_into(params.conv1_bias, grads.conv1_bias, -lr);
                axpy_into(params.conv2_kernel, grads.conv2_kernel, -lr);
                axpy_into(params.conv2_bias, grads.conv2_bias, -lr);
                axpy_into(params.head_kernel, grads.head_kernel, -lr);
                axpy_into(params.head_bias, grads.head_bias, -lr);
            } catch (const finite_value_error& e) {
                throw training_diverged("training diverged at epoch " + std::to_string(epoch) +
                                        ", step " + std::to_string(start / config.batch_size) +
                                        ": " + e.what());
            }
        }

        const EvalReport er = evaluate(params, eval_corpus);
        TrainLogRow row;
        row.epoch = epoch;
        row.kind = kind;
        row.train_loss = loss_sum / static_cast<double>(batches);
        row.mean_uc = uc_sum / static_cast<double>(batches);
        row.val_mae = er.mae;
        row.val_rmse = er.rmse;
        row.val_leakage = er.leakage;
        result.log.push_back(row);
    }

    result.params = std::move(params);
    result.final_eval = evaluate(result.params, eval_corpus);
    return result;
}

TrainResult run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    const std::vector<Scene> train_corpus =
        generate_corpus(config.n, config.single_category_fraction, config.corpus_seed);
    const std::vector<Scene> eval_corpus =
        generate_corpus(std::max<std::size_t>(2, config.n / 4), 0.5,
                        mix_seed(config.corpus_seed, kEvalCorpusSalt));
    return run_experiment(config, train_corpus, eval_corpus);
}

std::vector<AblationRow> run_ablation_matrix(const ExperimentConfig& base, std::size_t seeds) {
    if (seeds < 1) throw contract_error("run_ablation_matrix: seeds must be >= 1");
    struct RowDef {
        const char* label;
        bool use_es, use_uc;
        WeightMode mode;
    };
    const RowDef defs[] = {
        {"mse", false, false, WeightMode::Dirichlet},
        {"mse+uc", false, true, WeightMode::Dirichlet},
        {"fmse", true, false, WeightMode::Dirichlet},
        {"fmse+uc", true, true, WeightMode::Dirichlet},
        {"uc-entropy", true, true, WeightMode::EntropyOnly},
        {"uc-offset", true, true, WeightMode::OffsetOnly},
        {"uc-certainty", true, true, WeightMode::CertaintyOnly},
        {"uc-average", true, true, WeightMode::Average},
        {"uc-dirichlet", true, true, WeightMode::Dirichlet},
    };

    std::vector<AblationRow> rows;
    rows.reserve(std::size(defs));
    for (const RowDef& def : defs) {
        AblationRow row;
        row.label = def.label;
        row.config = base;
        row.config.use_es = def.use_es;
        row.config.use_uc = def.use_uc;
        row.config.weight_mode = def.mode;

        // The hash identifies the experiment, so out_dir (run placement,
        // not configuration) stays out of it.
        ExperimentConfig hashed = row.config;
        hashed.out_dir.clear();
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(
                          fnv1a64(row.label + "\n" + config_text(hashed))));
        row.config_hash = hash;

        for (std::size_t k = 0; k < seeds; ++k) {
            ExperimentConfig cfg = row.config;
            cfg.corpus_seed = mix_seed(base.corpus_seed, 100 + k);
            cfg.init_seed = mix_seed(base.init_seed, 200 + k);
            cfg.dirichlet_seed = mix_seed(base.dirichlet_seed, 300 + k);
            if (k == 0) row.config = cfg;
            const TrainResult res = run_experiment(cfg);
            row.per_seed.push_back(
                {res.final_eval.mae, res.final_eval.rmse, res.final_eval.leakage});
        }

        const auto aggregate = [&](double AblationCell::*field, double& mean_out,
                                   double& std_out) {
            double m = 0.0;
            for (const AblationCell& c : row.per_seed) m += c.*field;
            m /= static_cast<double>(seeds);
            double var = 0.0;
            for (const AblationCell& c : row.per_seed) {
                const double d = c.*field - m;
                var += d * d;
            }
            mean_out = m;
            std_out = seeds > 1 ? std::sqrt(var / static_cast<double>(seeds - 1)) : 0.0;
        };
        aggregate(&AblationCell::mae, row.mean.mae, row.stddev.mae);
        aggregate(&AblationCell::rmse, row.mean.rmse, row.stddev.rmse);
        aggregate(&AblationCell::leakage, row.mean.leakage, row.stddev.leakage);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    os << "label,config_hash,seed,mae,rmse,leakage\n";
    for (const AblationRow& row : rows) {
        for (std::size_t k = 0; k < row.per_seed.size(); ++k) {
            const AblationCell& c = row.per_seed[k];
            os << row.label << ',' << row.config_hash << ',' << k << ',' << fmt_metric(c.mae)
               << ',' << fmt_metric(c.rmse) << ',' << fmt_metric(c.leakage) << '\n';
        }
        os << row.label << ',' << row.config_hash << ",mean," << fmt_metric(row.mean.mae) << ','
           << fmt_metric(row.mean.rmse) << ',' << fmt_metric(row.mean.leakage) << '\n';
        os << row.label << ',' << row.config_hash << ",stddev," << fmt_metric(row.stddev.mae)
           << ',' << fmt_metric(row.stddev.rmse) << ',' << fmt_metric(row.stddev.leakage) << '\n';
    }
    return os.str();
}

} // namespace focalcount
