// Command line front end: corpus generation, training runs, the ablation
// matrix, quick verification suites and SVG training curves.
//
// Exit codes: 0 success, 2 usage or config error, 3 runtime failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "focalcount/attributes.hpp"
#include "focalcount/errors.hpp"
#include "focalcount/grad_check.hpp"
#include "focalcount/losses.hpp"
#include "focalcount/model.hpp"
#include "focalcount/plot.hpp"
#include "focalcount/rng.hpp"
#include "focalcount/synthgen.hpp"
#include "focalcount/trainer.hpp"

namespace fc = focalcount;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
    if (!os) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw fc::parse_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path prepare_out_dir(const std::string& dir) {
    const fs::path path = dir.empty() ? fs::path(".") : fs::path(dir);
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create " + path.string() + ": " + ec.message());
    return path;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Chart label for a log path: the run directory when there is one, else the
// file stem.
std::string series_label(const fs::path& log_path) {
    const std::string parent = log_path.parent_path().filename().string();
    return parent.empty() ? log_path.stem().string() : parent;
}

struct TrainArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

fc::ExperimentConfig resolve_config(const TrainArgs& args) {
    fc::ExperimentConfig config = fc::parse_config_file(args.config_path);
    for (const std::string& kv : args.overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw fc::parse_error("--set expects key=value, got '" + kv + "'");
        }
        fc::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed_set) {
        config.corpus_seed = fc::mix_seed(args.seed, 1);
        config.init_seed = fc::mix_seed(args.seed, 2);
        config.dirichlet_seed = fc::mix_seed(args.seed, 3);
    }
    fc::validate_config(config);
    return config;
}

int cmd_gen_corpus(std::size_t n, double fraction, std::uint64_t seed, const std::string& out) {
    const fs::path dir = prepare_out_dir(out);
    const std::vector<fc::Scene> corpus = fc::generate_corpus(n, fraction, seed);
    write_file(dir / "corpus.csv", fc::corpus_csv(corpus));
    std::ostringstream cfg;
    cfg << "n = " << n << "\nsingle_category_fraction = " << format_double(fraction)
        << "\nseed = " << seed << '\n';
    write_file(dir / "config.txt", cfg.str());
    std::cout << "wrote " << corpus.size() << " scenes to " << (dir / "corpus.csv").string()
              << '\n';
    return kExitOk;
}

int cmd_train(const TrainArgs& args) {
    const fc::ExperimentConfig config = resolve_config(args);
    const fs::path dir = prepare_out_dir(config.out_dir);
    write_file(dir / "config.txt", fc::config_text(config));

    const fc::TrainResult result = fc::run_experiment(config);
    write_file(dir / "trainlog.csv", fc::trainlog_csv(result.log));
    fc::save_checkpoint(result.params, (dir / "checkpoint.txt").string());

    std::printf("final: mae %.6g rmse %.6g leakage %.6g\n", result.final_eval.mae,
                result.final_eval.rmse, result.final_eval.leakage);
    std::cout << "outputs in " << dir.string() << '\n';
    return kExitOk;
}

int cmd_ablate(const TrainArgs& args, std::size_t seeds) {
    const fc::ExperimentConfig config = resolve_config(args);
    const fs::path dir = prepare_out_dir(config.out_dir);
    write_file(dir / "config.txt", fc::config_text(config));

    const std::vector<fc::AblationRow> rows = fc::run_ablation_matrix(config, seeds);
    write_file(dir / "ablation.csv", fc::ablation_csv(rows));

    for (const fc::AblationRow& row : rows) {
        std::printf("%-14s mae %8.4f +- %.4f   leakage %8.4f +- %.4f\n", row.label.c_str(),
                    row.mean.mae, row.stddev.mae, row.mean.leakage, row.stddev.leakage);
    }
    std::cout << "outputs in " << dir.string() << '\n';
    return kExitOk;
}

int cmd_plot(const std::vector<std::string>& logs, const std::string& out) {
    const fs::path dir = prepare_out_dir(out);
    std::vector<fc::PlotSeries> mae_series, leak_series;
    for (const std::string& log_path : logs) {
        const std::vector<fc::TrainLogRow> rows =
            fc::parse_trainlog_csv(read_file(log_path), log_path);
        fc::PlotSeries mae, leak;
        mae.label = leak.label = series_label(log_path);
        for (const fc::TrainLogRow& row : rows) {
            mae.x.push_back(static_cast<double>(row.epoch));
            mae.y.push_back(row.val_mae);
            leak.x.push_back(static_cast<double>(row.epoch));
            leak.y.push_back(row.val_leakage);
        }
        mae_series.push_back(std::move(mae));
        leak_series.push_back(std::move(leak));
    }
    write_file(dir / "mae_vs_epoch.svg",
               fc::render_line_chart("validation MAE by epoch", "MAE", mae_series));
    write_file(dir / "leakage_vs_epoch.svg",
               fc::render_line_chart("validation leakage by epoch", "leakage", leak_series));
    std::cout << "wrote " << (dir / "mae_vs_epoch.svg").string() << " and "
              << (dir / "leakage_vs_epoch.svg").string() << '\n';
    return kExitOk;
}

// One verification suite: prints its verdict, returns pass.
bool run_suite(const std::string& name, const std::function<std::string()>& body) {
    std::string failure;
    try {
        failure = body();
    } catch (const std::exception& e) {
        failure = e.what();
    }
    std::printf("%-24s %s\n", name.c_str(), failure.empty() ? "pass" : "FAIL");
    if (!failure.empty()) std::printf("    %s\n", failure.c_str());
    return failure.empty();
}

std::string suite_gradients() {
    fc::Rng rng(401);
    for (int trial = 0; trial < 10; ++trial) {
        fc::CounterParams params = fc::init_params(rng.next_u64());
        fc::Tensor image({4, 8, 8});
        for (std::size_t i = 0; i < image.size(); ++i) image.at(i) = rng.uniform();
        fc::Tensor gt({1, 8, 8});
        for (std::size_t i = 0; i < gt.size(); ++i)
            gt.at(i) = rng.uniform() < 0.8 ? 0.0 : rng.uniform();

        fc::Graph g;
        fc::TapeForward tf = fc::forward_on_tape(g, params, image);
        const fc::LossReport loss = fc::focal_mse_loss(g.value(tf.pred), gt);
        g.backward(tf.pred, loss.grad);

        const double err = fc::grad_check(
            [&](const fc::Tensor& x) {
                fc::CounterParams probe = params;
                probe.conv1_kernel = x;
                fc::Graph g2;
                fc::TapeForward tf2 = fc::forward_on_tape(g2, probe, image);
                fc::Tensor out({1});
                out.at(0) = fc::focal_mse_loss(g2.value(tf2.pred), gt).value;
                return out;
            },
            params.conv1_kernel, g.grad(tf.conv1_kernel), 1e-4);
        if (err >= 1e-5) {
            return "conv1 gradient error " + std::to_string(err) + " at trial " +
                   std::to_string(trial);
        }
    }
    return "";
}

std::string suite_dominance(bool inject_bug) {
    for (double g : {0.0, 1.0}) {
        for (int i = 1; i <= 99; ++i) {
            const double p = i / 100.0;
            fc::Tensor pv({1}), gv({1});
            pv.at(0) = p;
            gv.at(0) = g;
            const double mse_g = fc::mse_loss(pv, gv).grad.at(0);
            double fmse_g = fc::focal_mse_loss(pv, gv).grad.at(0);
            // Test fixture: the injected bug drops the cross-entropy term,
            // which must make this suite fail.
            if (inject_bug) fmse_g = mse_g;
            if (mse_g * fmse_g <= 0.0 || std::abs(fmse_g) <= std::abs(mse_g)) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "dominance violated at p=%.2f g=%.0f", p, g);
                return buf;
            }
        }
    }
    return "";
}

std::string suite_dirichlet() {
    fc::Rng rng(402);
    fc::DirichletParams params;
    params.alpha = {2.0, 1.0, 1.0};
    double mean[3] = {0.0, 0.0, 0.0};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const fc::WeightVector w = fc::sample_dirichlet(params, rng);
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            mean[k] += w.w[k];
            sum += w.w[k];
        }
        if (std::abs(sum - 1.0) > 1e-12) return "sample off the simplex";
    }
    const double expect[3] = {0.5, 0.25, 0.25};
    for (int k = 0; k < 3; ++k) {
        if (std::abs(mean[k] / n - expect[k]) > 0.01) {
            return "component " + std::to_string(k) + " mean " + std::to_string(mean[k] / n);
        }
    }
    return "";
}

std::string suite_attributes() {
    // Entropy peaks at one half.
    fc::Rng rng(403);
    fc::Tensor flat({1, 4, 4});
    for (std::size_t i = 0; i < flat.size(); ++i) flat.at(i) = 0.5;
    const double best = fc::compute_entropy(flat);
    for (int trial = 0; trial < 200; ++trial) {
        fc::Tensor t({1, 4, 4});
        for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = rng.uniform();
        if (fc::compute_entropy(t) > best) return "entropy exceeded the 0.5 map";
    }
    // Certainty falls as activation rises.
    double prev = 2.0;
    for (double v = 0.1; v < 1.0; v += 0.1) {
        fc::Tensor t({1, 4, 4});
        for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = v;
        const double c = fc::compute_certainty(t);
        if (c >= prev) return "certainty not strictly decreasing";
        prev = c;
    }
    // Combined weight is monotone in each attribute.
    fc::WeightVector w;
    w.w = {0.2, 0.3, 0.5};
    fc::AttributeTriple base;
    base.entropy = base.offset = base.inv_certainty = 0.4;
    const double u0 = fc::combine_weight(base, w);
    for (int k = 0; k < 3; ++k) {
        fc::AttributeTriple bumped = base;
        (k == 0 ? bumped.entropy : k == 1 ? bumped.offset : bumped.inv_certainty) += 0.1;
        if (fc::combine_weight(bumped, w) <= u0) return "combine_weight not monotone";
    }
    return "";
}

int cmd_verify(bool inject_dominance_bug) {
    bool ok = true;
    ok &= run_suite("gradient checks", suite_gradients);
    ok &= run_suite("gradient dominance", [&] { return suite_dominance(inject_dominance_bug); });
    ok &= run_suite("dirichlet sampling", suite_dirichlet);
    ok &= run_suite("attribute properties", suite_attributes);
    if (!ok) {
        std::printf("verification FAILED\n");
        return kExitRuntime;
    }
    std::printf("all suites passed\n");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic blob-counting benchmark: reweighted density training"};
    app.require_subcommand(1);

    // gen-corpus
    std::size_t gen_n = 256;
    double gen_fraction = 0.9;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "corpus";
    CLI::App* gen = app.add_subcommand("gen-corpus", "generate a scene corpus as CSV recipes");
    gen->add_option("--n", gen_n, "number of scenes")->capture_default_str();
    gen->add_option("--fraction", gen_fraction, "single-category fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    gen->add_option("--seed", gen_seed, "corpus seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->capture_default_str();

    // train
    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "run one training experiment");
    train->add_option("--config", train_args.config_path, "experiment config file")->required();
    train->add_option("--set", train_args.overrides, "override a config key (key=value)");
    CLI::Option* seed_opt = train->add_option("--seed", train_args.seed,
                                              "master seed deriving corpus/init/dirichlet seeds");

    // ablate
    TrainArgs ablate_args;
    std::size_t ablate_seeds = 1;
    CLI::App* ablate = app.add_subcommand("ablate", "run the component and weighting ablations");
    ablate->add_option("--config", ablate_args.config_path, "experiment config file")->required();
    ablate->add_option("--set", ablate_args.overrides, "override a config key (key=value)");
    ablate->add_option("--seeds", ablate_seeds, "seed repetitions per row")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // verify
    bool inject_dominance_bug = false;
    CLI::App* verify = app.add_subcommand("verify", "run the quick verification suites");
    verify->add_flag("--inject-dominance-bug", inject_dominance_bug, "test fixture: corrupt the sweep")
        ->group("");  // hidden

    // plot
    std::vector<std::string> plot_logs;
    std::string plot_out = "plots";
    CLI::App* plot = app.add_subcommand("plot", "render SVG curves from train logs");
    plot->add_option("--log", plot_logs, "trainlog.csv path (repeatable)")->required();
    plot->add_option("--out", plot_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_corpus(gen_n, gen_fraction, gen_seed, gen_out);
        if (train->parsed()) {
            train_args.seed_set = seed_opt->count() > 0;
            return cmd_train(train_args);
        }
        if (ablate->parsed()) return cmd_ablate(ablate_args, ablate_seeds);
        if (verify->parsed()) return cmd_verify(inject_dominance_bug);
        if (plot->parsed()) return cmd_plot(plot_logs, plot_out);
    } catch (const fc::parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fc::contract_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
