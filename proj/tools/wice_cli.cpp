// SPDX-License-Identifier: Apache-2.0
// Command-line front end: Monte-Carlo sweeps, dataset export, prediction
// scoring, complexity and data-rate tables.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "wice/wice.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> frames;
    std::vector<double> snr;
    std::vector<std::string> estimators;
    std::vector<std::string> scenarios;
    std::optional<int> workers;
};

void add_common(CLI::App* app, Overrides& o)
{
    app->add_option("--config", o.config, "INI config file (sections run, frame, wi, lmmse, addtt, rbf, dataset, "
                                          "profile.<name>)")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", o.seed, "master seed (default 1)");
    app->add_option("--workers", o.workers, "worker threads (default 1); results do not depend on it")
        ->check(CLI::PositiveNumber);
    app->add_option("--snr", o.snr, "SNR points in dB (default 0,10,20,30,40)")->delimiter(',');
    app->add_option("--scenarios", o.scenarios, "channel profiles: VTV-UC, VTV-SDWW-500, VTV-SDWW-1000 or a "
                                                "[profile.<name>] section (default VTV-SDWW-500)")
        ->delimiter(',');
}

wice::ExperimentConfig resolve(const Overrides& o)
{
    wice::ExperimentConfig cfg;
    if (!o.config.empty()) {
        cfg = wice::load_config(o.config, cfg);
    }
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.frames) {
        cfg.frames = *o.frames;
    }
    if (o.workers) {
        cfg.workers = *o.workers;
    }
    if (!o.snr.empty()) {
        cfg.snr_db = o.snr;
    }
    if (!o.estimators.empty()) {
        cfg.estimators = o.estimators;
    }
    if (!o.scenarios.empty()) {
        cfg.scenarios = o.scenarios;
    }
    cfg.validate();
    return cfg;
}

void emit(const wice::MetricsReport& report, const std::string& path)
{
    if (path.empty() || path == "-") {
        wice::write_csv(std::cout, report);
        return;
    }
    std::ofstream os(path);
    if (!os) {
        throw wice::Error("cannot open '" + path + "' for writing");
    }
    wice::write_csv(os, report);
}

std::string estimator_help()
{
    std::string s = "estimators (default ideal,ls,lmmse-100,wi-fp-sls,wi-fp-als,wi-lp):";
    for (const auto& e : wice::known_estimators()) {
        s += " " + e;
    }
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Doubly-selective 802.11p channel simulator and estimators"};
    app.require_subcommand(1);

    Overrides sim;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo NMSE/BER sweep, CSV report");
    add_common(simulate, sim);
    simulate->add_option("--frames", sim.frames, "frames per SNR point (default 100)")->check(CLI::PositiveNumber);
    simulate->add_option("--estimators", sim.estimators, estimator_help())->delimiter(',');
    simulate->add_option("--out", sim.out, "CSV output path (default stdout)");

    Overrides exp;
    auto* export_cmd = app.add_subcommand("export-dataset", "write <out>_train.wice and <out>_test.wice (WI input, "
                                                            "true channel target) for the first scenario");
    add_common(export_cmd, exp);
    std::optional<int> n_train;
    std::optional<int> n_test;
    export_cmd->add_option("--out", exp.out, "output prefix")->required();
    export_cmd->add_option("--train", n_train, "training records (default 8000)")->check(CLI::NonNegativeNumber);
    export_cmd->add_option("--test", n_test, "test records (default 2000)")->check(CLI::NonNegativeNumber);
    std::string export_scheme;
    export_cmd->add_option("--scheme", export_scheme, "WI scheme fp-sls|fp-als|lp (default fp-als)");

    Overrides ev;
    std::string dataset_path;
    std::string predictions_path;
    auto* eval = app.add_subcommand("eval-predictions", "score predicted grids against the frames behind a dataset");
    eval->add_option("--config", ev.config, "INI config file (only custom profiles are used)")
        ->check(CLI::ExistingFile);
    eval->add_option("--dataset", dataset_path, "dataset file with its .meta.json sidecar")->required();
    eval->add_option("--predictions", predictions_path, "prediction container (no targets)")->required();
    eval->add_option("--workers", ev.workers, "worker threads (default 1)")->check(CLI::PositiveNumber);
    eval->add_option("--out", ev.out, "CSV output path (default stdout)");

    wice::ComplexityParams cp;
    bool ratios = false;
    auto* cx = app.add_subcommand("complexity", "real-valued operation counts per frame for every scheme");
    cx->add_option("--kon", cp.K_on, "active subcarriers (default 52)");
    cx->add_option("--kp", cp.K_p, "comb pilots per symbol (default 4)");
    cx->add_option("--kd", cp.K_d, "data subcarriers per symbol (default 48)");
    cx->add_option("--symbols", cp.I, "symbols per frame I (default 100)");
    cx->add_option("--L", cp.L, "LP pilots / retained taps (default 12)");
    cx->add_option("--P", cp.P, "pilot symbols (default 1)");
    cx->add_flag("--ratios", ratios, "print every pairwise total ratio instead");

    wice::FrameSpec ts;
    auto* tdr_cmd = app.add_subcommand("tdr", "data-rate gain and buffering time of the WI frame structures");
    tdr_cmd->add_option("--symbols", ts.I, "symbols per frame I (default 100)");
    tdr_cmd->add_option("--L", ts.L, "LP pilots per pilot symbol (default 12)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            emit(wice::run_simulation(resolve(sim)), sim.out);
        } else if (*export_cmd) {
            auto cfg = resolve(exp);
            if (n_train) {
                cfg.dataset_train = *n_train;
            }
            if (n_test) {
                cfg.dataset_test = *n_test;
            }
            if (!export_scheme.empty()) {
                cfg.wi_scheme = export_scheme;
            }
            if (!exp.snr.empty()) {
                if (exp.snr.size() != 1) {
                    throw wice::Error("export-dataset takes a single --snr value");
                }
                cfg.dataset_snr_db = exp.snr.front();
            }
            cfg.validate();
            const auto r = wice::export_dataset(cfg, exp.out);
            std::cout << r.train_path << ' ' << r.train.records << '\n' << r.test_path << ' ' << r.test.records << '\n';
        } else if (*eval) {
            auto cfg = resolve(ev);
            emit(wice::eval_predictions(dataset_path, predictions_path, cfg), ev.out);
        } else if (*cx) {
            if (ratios) {
                std::cout << "a,b,ratio\n";
                for (const auto& r : wice::complexity_ratio_table(cp)) {
                    std::cout << r.a << ',' << r.b << ',' << wice::format_double(r.ratio) << '\n';
                }
            } else {
                std::cout << "scheme,mul_div,sum_sub,total\n";
                for (const auto& s : wice::complexity_schemes()) {
                    const auto c = wice::complexity(s, cp);
                    std::cout << s << ',' << c.mul_div << ',' << c.sum_sub << ',' << c.total() << '\n';
                }
            }
        } else if (*tdr_cmd) {
            std::cout << "P,scheme,data_subcarriers,tdr_mbps,gain_pct,phi_us\n";
            for (int P = 0; P <= 3; ++P) {
                for (auto scheme : {wice::PilotScheme::fp, wice::PilotScheme::lp}) {
                    if (P == 0 && scheme == wice::PilotScheme::lp) {
                        continue;
                    }
                    wice::FrameSpec s = ts;
                    s.P = P;
                    s.scheme = scheme;
                    const auto r = wice::tdr(s);
                    std::cout << P << ',' << (P == 0 ? "standard" : wice::to_string(scheme)) << ','
                              << wice::data_subcarrier_count(s) << ',' << wice::format_double(r.bits_per_second / 1e6)
                              << ',' << wice::format_double(r.gain_pct_2dp()) << ','
                              << wice::format_double(wice::buffering_time_us(s)) << '\n';
                }
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
