// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "wice/baseline.hpp"
#include "wice/channel.hpp"
#include "wice/dataset.hpp"
#include "wice/frame.hpp"
#include "wice/metrics.hpp"
#include "wice/random.hpp"
#include "wice/wi.hpp"

namespace wice {

/// Pilot symbols per frame for a Doppler: 1 up to 250 Hz, 2 up to 500 Hz, else 3.
inline int default_pilot_symbols(double doppler_hz)
{
    return doppler_hz <= 250.0 ? 1 : doppler_hz <= 500.0 ? 2 : 3;
}

struct ExperimentConfig {
    std::vector<std::string> scenarios{"VTV-SDWW-500"};
    std::vector<std::string> estimators{"ideal", "ls", "lmmse-100", "wi-fp-sls", "wi-fp-als", "wi-lp"};
    std::vector<double> snr_db{0, 10, 20, 30, 40};
    int frames = 100;
    std::uint64_t seed = 1;
    int workers = 1;

    int I = 100;
    int M = 4;

    std::string wi_scheme = "fp-als"; // used by the plain "wi" estimator
    int wi_P = 0;                     // 0 picks P from the scenario Doppler
    int wi_L = 12;

    int lmmse_window = 100; // used by the plain "lmmse" estimator
    AddTtParams addtt{};
    double rbf_r0 = default_rbf_r0;

    int dataset_train = 8000;
    int dataset_test = 2000;
    double dataset_snr_db = 30.0;

    std::map<std::string, TdlProfile> profiles; // extra profiles from the config file

    void validate() const
    {
        if (frames < 1) {
            throw Error("frames must be at least 1");
        }
        if (snr_db.empty()) {
            throw Error("SNR list is empty");
        }
        if (scenarios.empty() || estimators.empty()) {
            throw Error("need at least one scenario and one estimator");
        }
        if (workers < 1) {
            throw Error("workers must be at least 1");
        }
        if (wi_P < 0 || wi_P > 3) {
            throw Error("wi.P must be 0 (auto) or 1..3");
        }
        if (lmmse_window < 1) {
            throw Error("lmmse.window must be positive");
        }
        if (!(rbf_r0 > 0.0)) {
            throw Error("rbf.r0 must be positive");
        }
        if (dataset_train < 0 || dataset_test < 0) {
            throw Error("dataset sizes must be nonnegative");
        }
        addtt.validate();
        parse_wi_scheme(wi_scheme);
        (void)constellation(M);
    }

    [[nodiscard]] TdlProfile profile(const std::string& name) const
    {
        if (const auto it = profiles.find(name); it != profiles.end()) {
            return it->second;
        }
        return builtin_profile(name);
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) {
            throw Error("config: empty item in list '" + s + "'");
        }
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& key)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': expected a number, got '" + s + "'");
    }
}

inline long parse_int(const std::string& s, const std::string& key)
{
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': expected an integer, got '" + s + "'");
    }
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& key)
{
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        out.push_back(parse_double(item, key));
    }
    return out;
}

} // namespace detail

/// Sectioned key = value config. Unknown sections or keys are errors.
inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig cfg = {})
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (section.starts_with("profile.")) {
            TdlProfile p;
            p.name = section.substr(8);
            for (const auto& [key, node] : body) {
                const std::string full = section + "." + key;
                const auto v = node.get_value<std::string>();
                if (key == "delays_ns") {
                    p.delays_ns = detail::parse_doubles(v, full);
                } else if (key == "gains_db") {
                    p.gains_db = detail::parse_doubles(v, full);
                } else if (key == "doppler_hz") {
                    p.doppler_hz = detail::parse_double(v, full);
                } else if (key == "velocity_kmh") {
                    p.velocity_kmh = detail::parse_double(v, full);
                } else {
                    throw Error("config: unknown key '" + full + "'");
                }
            }
            p.validate();
            cfg.profiles[p.name] = p;
            continue;
        }
        for (const auto& [key, node] : body) {
            const std::string full = section + "." + key;
            const auto v = node.get_value<std::string>();
            auto as_int = [&] { return static_cast<int>(detail::parse_int(v, full)); };
            auto as_double = [&] { return detail::parse_double(v, full); };
            if (full == "run.scenarios") {
                cfg.scenarios = detail::split_list(v);
            } else if (full == "run.estimators") {
                cfg.estimators = detail::split_list(v);
            } else if (full == "run.snr_db") {
                cfg.snr_db = detail::parse_doubles(v, full);
            } else if (full == "run.frames") {
                cfg.frames = as_int();
            } else if (full == "run.seed") {
                cfg.seed = static_cast<std::uint64_t>(detail::parse_int(v, full));
            } else if (full == "run.workers") {
                cfg.workers = as_int();
            } else if (full == "frame.I") {
                cfg.I = as_int();
            } else if (full == "frame.M") {
                cfg.M = as_int();
            } else if (full == "wi.scheme") {
                cfg.wi_scheme = v;
            } else if (full == "wi.P") {
                cfg.wi_P = as_int();
            } else if (full == "wi.L") {
                cfg.wi_L = as_int();
            } else if (full == "lmmse.window") {
                cfg.lmmse_window = as_int();
            } else if (full == "addtt.alpha") {
                cfg.addtt.alpha = as_double();
            } else if (full == "addtt.beta") {
                cfg.addtt.beta = as_int();
            } else if (full == "addtt.L") {
                cfg.addtt.L = as_int();
            } else if (full == "rbf.r0") {
                cfg.rbf_r0 = as_double();
            } else if (full == "dataset.train") {
                cfg.dataset_train = as_int();
            } else if (full == "dataset.test") {
                cfg.dataset_test = as_int();
            } else if (full == "dataset.snr_db") {
                cfg.dataset_snr_db = as_double();
            } else {
                throw Error("config: unknown key '" + full + "'");
            }
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg = {})
{
    std::ifstream is(path);
    if (!is) {
        throw Error("cannot open config '" + path + "'");
    }
    return parse_config(is, std::move(cfg));
}

// ---------------------------------------------------------------------------
// Estimator registry

inline std::vector<std::string> known_estimators()
{
    return {"ideal", "ls", "lmmse", "lmmse-100", "lmmse-10", "rbf", "addtt", "wi", "wi-fp-sls", "wi-fp-als", "wi-lp"};
}

/// A configured estimator bound to one scenario and SNR. Immutable once built;
/// shared by all workers.
struct BoundEstimator {
    std::string name;
    std::shared_ptr<const FrameLayout> layout;
    std::function<CMatrix(const FrameGrid& rx, const ChannelRealization& ch)> run;
    OpCount ops;
};

namespace detail {

struct LayoutCache {
    std::map<std::tuple<int, int, int>, std::shared_ptr<const FrameLayout>> layouts;

    std::shared_ptr<const FrameLayout> get(FrameSpec spec)
    {
        const auto key = std::make_tuple(spec.P, static_cast<int>(spec.scheme), spec.L);
        auto it = layouts.find(key);
        if (it == layouts.end()) {
            it = layouts.emplace(key, make_layout(spec)).first;
        }
        return it->second;
    }
};

inline FrameSpec base_spec(const ExperimentConfig& cfg)
{
    FrameSpec s;
    s.I = cfg.I;
    s.M = cfg.M;
    s.L = cfg.wi_L;
    return s;
}

} // namespace detail

inline BoundEstimator bind_estimator(const std::string& name, const ExperimentConfig& cfg, const TdlProfile& profile,
                                     double snr_db, detail::LayoutCache& layouts)
{
    FrameSpec spec = detail::base_spec(cfg);
    const double sigma2 = noise_variance(snr_db);
    ComplexityParams cp;
    cp.I = spec.I;
    cp.L = spec.L;

    BoundEstimator b;
    b.name = name;
    if (name == "ideal") {
        b.layout = layouts.get(spec);
        b.run = [](const FrameGrid&, const ChannelRealization& ch) { return ch.data_region(); };
        return b;
    }
    if (name == "ls") {
        b.layout = layouts.get(spec);
        b.run = [](const FrameGrid& rx, const ChannelRealization&) { return ls_hold(rx).H_hat; };
        b.ops = {2 * cp.K_on, 2 * cp.K_on};
        return b;
    }
    if (name == "lmmse" || name == "lmmse-100" || name == "lmmse-10") {
        const int window = name == "lmmse" ? cfg.lmmse_window : name == "lmmse-10" ? 10 : 100;
        b.layout = layouts.get(spec);
        auto interp = std::make_shared<const LmmseInterpolator>(ChannelCorrelation::from_profile(profile, spec),
                                                                b.layout->subcarriers, spec.I,
                                                                b.layout->pilot_cells(), sigma2, window);
        b.run = [interp](const FrameGrid& rx, const ChannelRealization&) { return lmmse_2d(rx, *interp).H_hat; };
        b.ops = complexity("lmmse-online", cp);
        return b;
    }
    if (name == "rbf") {
        b.layout = layouts.get(spec);
        auto rbf = std::make_shared<const RbfInterpolator>(b.layout->pilot_cells(), spec.K_on, spec.I, cfg.rbf_r0);
        b.run = [rbf](const FrameGrid& rx, const ChannelRealization&) { return rbf_interpolate(rx, *rbf).H_hat; };
        b.ops = complexity("rbf", cp);
        return b;
    }
    if (name == "addtt") {
        b.layout = layouts.get(spec);
        auto dft = std::make_shared<const DftMatrices>(make_dft_matrices(b.layout->subcarriers, spec.K, cfg.addtt.L));
        const AddTtParams params = cfg.addtt;
        b.run = [dft, params](const FrameGrid& rx, const ChannelRealization&) {
            return add_tt(rx, ls_preamble(rx), params, *dft).H_hat;
        };
        b.ops = complexity("addtt", cp);
        return b;
    }
    if (name == "wi" || name.starts_with("wi-")) {
        const WiScheme scheme = parse_wi_scheme(name == "wi" ? cfg.wi_scheme : name.substr(3));
        spec.P = cfg.wi_P > 0 ? cfg.wi_P : default_pilot_symbols(profile.doppler_hz);
        spec.scheme = pilot_scheme_of(scheme);
        b.layout = layouts.get(spec);
        auto est = std::make_shared<const WiEstimator>(b.layout, scheme, profile.doppler_hz);
        b.run = [est](const FrameGrid& rx, const ChannelRealization&) { return est->estimate(rx).H_hat; };
        cp.P = spec.P;
        b.ops = complexity(to_string(scheme), cp);
        return b;
    }
    throw Error("unknown estimator '" + name + "'");
}

// ---------------------------------------------------------------------------
// Monte-Carlo sweep

/// Seed of frame n in scenario s. Independent of the SNR, so every SNR point
/// sees the same channels and unit-variance noise draws.
inline std::uint64_t frame_seed(std::uint64_t master, std::size_t scenario, std::uint64_t frame)
{
    return derive_seed(derive_seed(master, scenario), frame);
}

/// Bits for a layout are drawn from a stream keyed by its structure, so all
/// estimators sharing a layout see the same payload.
inline std::uint64_t payload_seed(std::uint64_t frame_seed_value, const FrameSpec& spec)
{
    return derive_seed(frame_seed_value, 0x100U + static_cast<std::uint64_t>(spec.P) * 4U +
                                             static_cast<std::uint64_t>(spec.scheme));
}

namespace detail {

/// Runs `body(n)` for n in [0, count) on `workers` threads, strided so that
/// every index is processed exactly once.
inline void parallel_for(int count, int workers, const std::function<void(int)>& body)
{
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int n = 0; n < count; ++n) {
            body(n);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int n = w; n < count; n += workers) {
                    body(n);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace detail

inline MetricsReport run_simulation(const ExperimentConfig& cfg)
{
    cfg.validate();
    MetricsReport report;
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        const TdlProfile profile = cfg.profile(cfg.scenarios[s]);
        detail::LayoutCache layouts;
        // bound[snr][estimator]
        std::vector<std::vector<BoundEstimator>> bound;
        for (double snr : cfg.snr_db) {
            std::vector<BoundEstimator> row;
            for (const auto& name : cfg.estimators) {
                row.push_back(bind_estimator(name, cfg, profile, snr, layouts));
            }
            bound.push_back(std::move(row));
        }
        const std::size_t n_snr = cfg.snr_db.size();
        const std::size_t n_est = cfg.estimators.size();
        std::vector<FrameResult> results(static_cast<std::size_t>(cfg.frames) * n_snr * n_est);
        const FrameSpec chan_spec = detail::base_spec(cfg);

        detail::parallel_for(cfg.frames, cfg.workers, [&](int n) {
            const std::uint64_t fs = frame_seed(cfg.seed, s, static_cast<std::uint64_t>(n));
            const ChannelRealization ch = sample_channel(profile, chan_spec, fs);
            std::map<const FrameLayout*, FrameGrid> tx;
            for (std::size_t j = 0; j < n_snr; ++j) {
                std::map<const FrameLayout*, FrameGrid> rx;
                for (std::size_t e = 0; e < n_est; ++e) {
                    const BoundEstimator& b = bound[j][e];
                    const FrameLayout* key = b.layout.get();
                    if (!tx.contains(key)) {
                        tx.emplace(key, build_random_frame(b.layout, payload_seed(fs, b.layout->spec)));
                    }
                    if (!rx.contains(key)) {
                        rx.emplace(key, apply_channel(tx.at(key), ch, cfg.snr_db[j]));
                    }
                    const FrameGrid& y = rx.at(key);
                    const CMatrix H_hat = b.run(y, ch);
                    FrameResult r = score_frame(H_hat, ch.data_region());
                    const BitVector decoded = equalize_and_demap(y, H_hat);
                    r.bit_errors = bit_errors(decoded, y.payload_bits);
                    r.bits = decoded.size();
                    results[(static_cast<std::size_t>(n) * n_snr + j) * n_est + e] = r;
                }
            }
        });

        for (std::size_t e = 0; e < n_est; ++e) {
            for (std::size_t j = 0; j < n_snr; ++j) {
                PointAccumulator acc;
                for (int n = 0; n < cfg.frames; ++n) {
                    acc.add(results[(static_cast<std::size_t>(n) * n_snr + j) * n_est + e]);
                }
                const BoundEstimator& b = bound[j][e];
                MetricsRow row;
                row.estimator = b.name;
                row.scenario = profile.name;
                row.snr_db = cfg.snr_db[j];
                row.nmse = acc.nmse();
                row.ber = acc.ber();
                row.frames = acc.frames;
                row.ci95 = acc.ci95();
                row.ops = b.ops;
                row.tdr_gain_pct = tdr(b.layout->spec).gain_pct();
                row.phi_us = buffering_time_us(b.layout->spec);
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Dataset export and prediction ingest

/// Data-symbol columns of the frame (pilot-symbol columns removed).
inline std::vector<int> data_symbol_columns(const FrameLayout& layout)
{
    std::vector<int> cols;
    for (int i = 0; i < layout.spec.I; ++i) {
        if (std::ranges::find(layout.pilot_symbols, i) == layout.pilot_symbols.end()) {
            cols.push_back(i);
        }
    }
    return cols;
}

inline CMatrix select_columns(const CMatrix& H, const std::vector<int>& cols)
{
    CMatrix out(H.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out.col(static_cast<Eigen::Index>(c)) = H.col(cols[c]);
    }
    return out;
}

/// Everything needed to regenerate the frames behind a dataset file.
struct DatasetMeta {
    std::string scenario;
    std::string scheme;
    double snr_db = 30.0;
    std::uint64_t seed = 1;
    std::uint64_t first_frame = 0;
    std::size_t records = 0;
    int I = 100;
    int P = 1;
    int L = 12;
    int M = 4;
    std::string split;

    [[nodiscard]] nlohmann::json to_json() const
    {
        return {{"scenario", scenario}, {"scheme", scheme}, {"snr_db", snr_db},   {"seed", seed},
                {"first_frame", first_frame}, {"records", records}, {"I", I}, {"P", P},
                {"L", L},               {"M", M},           {"split", split}};
    }

    static DatasetMeta from_json(const nlohmann::json& j)
    {
        try {
            DatasetMeta m;
            m.scenario = j.at("scenario").get<std::string>();
            m.scheme = j.at("scheme").get<std::string>();
            m.snr_db = j.at("snr_db").get<double>();
            m.seed = j.at("seed").get<std::uint64_t>();
            m.first_frame = j.at("first_frame").get<std::uint64_t>();
            m.records = j.at("records").get<std::size_t>();
            m.I = j.at("I").get<int>();
            m.P = j.at("P").get<int>();
            m.L = j.at("L").get<int>();
            m.M = j.at("M").get<int>();
            m.split = j.value("split", "");
            return m;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("dataset meta: ") + e.what());
        }
    }
};

inline std::string meta_path(const std::string& dataset_path)
{
    return dataset_path + ".meta.json";
}

inline void write_meta(const std::string& dataset_path, const DatasetMeta& meta)
{
    std::ofstream os(meta_path(dataset_path));
    if (!os) {
        throw Error("cannot write '" + meta_path(dataset_path) + "'");
    }
    os << meta.to_json().dump(2) << '\n';
}

inline DatasetMeta read_meta(const std::string& dataset_path)
{
    std::ifstream is(meta_path(dataset_path));
    if (!is) {
        throw Error("missing sidecar '" + meta_path(dataset_path) + "'");
    }
    try {
        return DatasetMeta::from_json(nlohmann::json::parse(is));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("dataset meta: ") + e.what());
    }
}

/// Frame context shared by export and prediction evaluation.
struct DatasetFrame {
    FrameGrid rx;
    ChannelRealization ch;
    EstimateGrid wi;
};

inline DatasetFrame regenerate_frame(const DatasetMeta& meta, const TdlProfile& profile,
                                     const std::shared_ptr<const FrameLayout>& layout, const WiEstimator& est,
                                     std::uint64_t frame)
{
    // stream 0x57 keeps dataset frames disjoint from simulate's scenario streams
    const std::uint64_t fs = frame_seed(meta.seed, 0x57, frame);
    DatasetFrame f;
    f.ch = sample_channel(profile, layout->spec, fs);
    f.rx = apply_channel(build_random_frame(layout, payload_seed(fs, layout->spec)), f.ch, meta.snr_db);
    f.wi = est.estimate(f.rx);
    return f;
}

struct ExportResult {
    std::string train_path;
    std::string test_path;
    DatasetMeta train;
    DatasetMeta test;
};

/// Writes <prefix>_train.wice and <prefix>_test.wice for the first scenario
/// and the configured WI scheme. Input is the WI estimate over the data
/// symbols, target the true channel there.
inline ExportResult export_dataset(const ExperimentConfig& cfg, const std::string& prefix)
{
    cfg.validate();
    const TdlProfile profile = cfg.profile(cfg.scenarios.front());
    const WiScheme scheme = parse_wi_scheme(cfg.wi_scheme);
    FrameSpec spec = detail::base_spec(cfg);
    spec.P = cfg.wi_P > 0 ? cfg.wi_P : default_pilot_symbols(profile.doppler_hz);
    spec.scheme = pilot_scheme_of(scheme);
    const auto layout = make_layout(spec);
    const WiEstimator est(layout, scheme, profile.doppler_hz);
    const auto cols = data_symbol_columns(*layout);

    auto make = [&](const std::string& split, std::uint64_t first, int count) {
        DatasetMeta meta{profile.name, to_string(scheme), cfg.dataset_snr_db, cfg.seed, first,
                         static_cast<std::size_t>(count), spec.I, spec.P, spec.L, spec.M, split};
        Dataset ds;
        ds.K_on = spec.K_on;
        ds.I_d = static_cast<int>(cols.size());
        ds.records.resize(static_cast<std::size_t>(count));
        detail::parallel_for(count, cfg.workers, [&](int n) {
            const auto f = regenerate_frame(meta, profile, layout, est, first + static_cast<std::uint64_t>(n));
            auto& r = ds.records[static_cast<std::size_t>(n)];
            r.input = complex_stack(select_columns(f.wi.H_hat, cols));
            r.target = complex_stack(select_columns(f.ch.data_region(), cols));
        });
        const std::string path = prefix + "_" + split + ".wice";
        write_dataset(path, ds);
        write_meta(path, meta);
        return std::make_pair(path, meta);
    };
    ExportResult out;
    std::tie(out.train_path, out.train) = make("train", 0, cfg.dataset_train);
    std::tie(out.test_path, out.test) = make("test", static_cast<std::uint64_t>(cfg.dataset_train), cfg.dataset_test);
    return out;
}

/// Scores predicted data-symbol grids against the frames behind `dataset_path`.
/// Pilot-symbol columns keep their anchor estimates. Reports the WI input and
/// the prediction side by side.
inline MetricsReport eval_predictions(const std::string& dataset_path, const std::string& predictions_path,
                                      const ExperimentConfig& cfg = {})
{
    const DatasetMeta meta = read_meta(dataset_path);
    const Dataset pred = read_dataset(predictions_path);
    const TdlProfile profile = cfg.profile(meta.scenario);
    const WiScheme scheme = parse_wi_scheme(meta.scheme);
    FrameSpec spec;
    spec.I = meta.I;
    spec.P = meta.P;
    spec.L = meta.L;
    spec.M = meta.M;
    spec.scheme = pilot_scheme_of(scheme);
    const auto layout = make_layout(spec);
    const auto cols = data_symbol_columns(*layout);
    if (pred.K_on != spec.K_on || pred.I_d != static_cast<int>(cols.size())) {
        throw DimensionError("prediction dimensions do not match the dataset frames");
    }
    if (pred.records.size() != meta.records) {
        throw DimensionError("prediction count " + std::to_string(pred.records.size()) + " differs from the " +
                             std::to_string(meta.records) + " dataset records");
    }
    const WiEstimator est(layout, scheme, profile.doppler_hz);
    const auto n = static_cast<int>(pred.records.size());
    std::vector<FrameResult> base(static_cast<std::size_t>(n));
    std::vector<FrameResult> cnn(static_cast<std::size_t>(n));
    detail::parallel_for(n, cfg.workers, [&](int r) {
        const auto f = regenerate_frame(meta, profile, layout, est, meta.first_frame + static_cast<std::uint64_t>(r));
        CMatrix H = f.wi.H_hat;
        const CMatrix p = complex_unstack(pred.records[static_cast<std::size_t>(r)].input);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            H.col(cols[c]) = p.col(static_cast<Eigen::Index>(c));
        }
        auto score = [&](const CMatrix& Hh) {
            FrameResult fr = score_frame(Hh, f.ch.data_region());
            const auto bits = equalize_and_demap(f.rx, Hh);
            fr.bit_errors = bit_errors(bits, f.rx.payload_bits);
            fr.bits = bits.size();
            return fr;
        };
        base[static_cast<std::size_t>(r)] = score(f.wi.H_hat);
        cnn[static_cast<std::size_t>(r)] = score(H);
    });

    ComplexityParams cp;
    cp.I = spec.I;
    cp.L = spec.L;
    cp.P = spec.P;
    MetricsReport report;
    for (const auto& [label, results, ops] :
         {std::tuple{"wi-" + meta.scheme, &base, complexity(meta.scheme, cp)},
          std::tuple{"wi-" + meta.scheme + "-cnn", &cnn, complexity(meta.scheme, cp)}}) {
        PointAccumulator acc;
        for (const auto& fr : *results) {
            acc.add(fr);
        }
        MetricsRow row;
        row.estimator = label;
        row.scenario = meta.scenario;
        row.snr_db = meta.snr_db;
        row.nmse = acc.nmse();
        row.ber = acc.ber();
        row.frames = acc.frames;
        row.ci95 = acc.ci95();
        row.ops = ops;
        row.tdr_gain_pct = tdr(spec).gain_pct();
        row.phi_us = buffering_time_us(spec);
        report.rows.push_back(row);
    }
    return report;
}

} // namespace wice
