#include "risim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "risim/artifacts.hpp"
#include "risim/csv.hpp"
#include "risim/errors.hpp"
#include "risim/inference.hpp"
#include "risim/optimizer.hpp"
#include "risim/pipeline.hpp"
#include "risim/scenario.hpp"
#include "risim/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace risim {

namespace {

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& scenario_path) {
    ScenarioSpec spec = load_scenario(scenario_path);
    std::vector<std::string> issues = validate_scenario(spec, /*strict=*/true);

    std::cout << "scenario: " << scenario_path << "\n";
    if (issues.empty()) {
        CompiledScenario compiled = compile_scenario(spec, spec.object.default_state);
        Trajectory traj{spec.trajectory};
        std::cout << "dipoles: " << compiled.dipoles.size() << " total"
                  << " (tx 1, ue 1, aux " << compiled.sets.aux.size() << ", ris "
                  << compiled.sets.ris.size() << ", walls " << compiled.sets.wall.size()
                  << ", object " << compiled.sets.object.size() << " for "
                  << shape_name(spec.object.default_state.shape) << ")\n";
        std::cout << "pixels: " << compiled.num_pixels() << "\n";
        std::cout << "trajectory length: " << CsvWriter::num(traj.length())
                  << " wavelengths\n";
        std::cout << "ok\n";
        return 0;
    }
    for (const std::string& issue : issues) std::cout << "issue: " << issue << "\n";
    std::cout << "invalid (" << issues.size() << " issue" << (issues.size() == 1 ? "" : "s")
              << ")\n";
    return 1;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
    std::string scenario_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    double resolution = 0.1;
    int pool = 100;
    int series_length = 8;
    int mode_a_positions = 300;
    int mode_a_draws = 6;
    int mode_b_positions = 480;
    int mode_b_draws = 6;
    int epochs_a = 150;
    int epochs_b = 200;
    int pref_states = 16;
    int pref_configs = 32;
    int ignorant_samples = 24;
};

std::vector<PerturberState> draw_states(int n, std::uint64_t seed) {
    std::vector<PerturberState> states;
    Rng rng = make_rng(seed);
    for (int i = 0; i < n; ++i) {
        PerturberState s;
        s.p = uniform_real(rng, 0.0, 1.0);
        s.shape = static_cast<Shape>(rng() % kNumShapes);
        states.push_back(s);
    }
    return states;
}

json report_json(const CodeBook& book, const BankTrainReport& report, double p_ref,
                 double nonlinearity) {
    json j;
    j["kind"] = "calibration_report";
    j["tool_version"] = kVersion;
    j["p_ref"] = p_ref;
    j["nonlinearity_index"] = nonlinearity;
    json entries = json::array();
    for (const CodeBookEntry& e : book.entries) {
        entries.push_back({{"bin", e.bin},
                           {"shape", shape_name(e.shape)},
                           {"p_center", e.p_center},
                           {"r0", e.pair.r0},
                           {"r1", e.pair.r1},
                           {"tau", e.pair.tau},
                           {"separation", e.pair.r1 - e.pair.r0}});
    }
    j["codebook"] = std::move(entries);
    json models = json::array();
    for (const ModelReport& m : report.models) {
        json jm = {{"name", m.name},
                   {"final_train_loss", m.final_train_loss},
                   {"final_val_loss", m.final_val_loss}};
        if (m.val_shape_accuracy >= 0.0) jm["val_shape_accuracy"] = m.val_shape_accuracy;
        if (m.val_position_mae >= 0.0) jm["val_position_mae"] = m.val_position_mae;
        models.push_back(std::move(jm));
    }
    j["models"] = std::move(models);
    return j;
}

int cmd_calibrate(const CalibrateArgs& args) {
    ScenarioSpec spec = load_scenario(args.scenario_path);
    std::vector<std::string> issues = validate_scenario(spec, /*strict=*/true);
    if (!issues.empty()) {
        for (const std::string& issue : issues) std::cerr << "issue: " << issue << "\n";
        throw ValidationError("scenario failed validation; run the validate command for details");
    }

    fs::create_directories(args.out_dir);
    std::vector<std::string> written;
    auto out_path = [&](const std::string& name) { return (fs::path(args.out_dir) / name).string(); };

    try {
        const std::uint64_t hash = scenario_hash(spec);
        std::cout << "reference power..." << std::endl;
        const double p_ref = reference_power(spec, args.pref_states, args.pref_configs,
                                             derive_seed(args.seed, 0x9ef));

        std::cout << "code book (resolution " << CsvWriter::num(args.resolution) << ")..."
                  << std::endl;
        CodeBook book = build_codebook(spec, args.resolution, derive_seed(args.seed, 0xb00c),
                                       args.pool);

        std::cout << "context-ignorant baseline..." << std::endl;
        ConfigPair ignorant =
            context_ignorant_pair(spec, draw_states(args.ignorant_samples,
                                                    derive_seed(args.seed, 0x16)),
                                  derive_seed(args.seed, 0x16, 1), args.pool);

        std::cout << "sensing models..." << std::endl;
        BankBuildOptions options;
        options.series_length = args.series_length;
        options.mode_a_data.n_positions = args.mode_a_positions;
        options.mode_a_data.noise_draws = args.mode_a_draws;
        options.mode_b_data.n_positions = args.mode_b_positions;
        options.mode_b_data.noise_draws = args.mode_b_draws;
        options.mode_a_shape_train.epochs = args.epochs_a;
        options.mode_a_position_train.epochs = args.epochs_a;
        options.mode_b_shape_train.epochs = args.epochs_b;
        options.mode_b_position_train.epochs = args.epochs_b;
        BankTrainReport train_report;
        InferenceBank bank = build_inference_bank(spec, book, p_ref,
                                                  derive_seed(args.seed, 0xba4c), options,
                                                  &train_report);

        const double nonlinearity =
            nonlinearity_index(compile_scenario(spec, spec.object.default_state), 300,
                               derive_seed(args.seed, 0x41));

        ArtifactMeta meta{kVersion, args.seed, hash};
        CalibrationManifest manifest;
        manifest.tool_version = kVersion;
        manifest.master_seed = args.seed;
        manifest.scenario_hash = hash;
        manifest.resolution = args.resolution;
        manifest.p_ref = p_ref;
        manifest.ignorant_pair = ignorant;

        write_text_file(out_path(manifest.scenario_file), scenario_to_json_text(spec));
        written.push_back(out_path(manifest.scenario_file));
        save_codebook(book, meta, out_path(manifest.codebook_file));
        written.push_back(out_path(manifest.codebook_file));
        save_bank(bank, kVersion, out_path(manifest.bank_file));
        written.push_back(out_path(manifest.bank_file));
        write_text_file(out_path(manifest.report_file),
                        report_json(book, train_report, p_ref, nonlinearity).dump(2));
        written.push_back(out_path(manifest.report_file));
        // The manifest goes last: its presence marks a complete directory.
        save_manifest(manifest, out_path("manifest.json"));
        written.push_back(out_path("manifest.json"));

        std::cout << "p_ref " << CsvWriter::num(p_ref) << "\n"
                  << "nonlinearity_index " << CsvWriter::num(nonlinearity) << "\n"
                  << "codebook entries " << book.entries.size() << " (" << book.bins
                  << " bins)\n"
                  << "mode_b models " << bank.mode_b.size() << " configs\n"
                  << "wrote " << args.out_dir << "\n";
        return 0;
    } catch (...) {
        // Do not leave a half-written artifact directory behind.
        for (const std::string& path : written) {
            std::error_code ec;
            fs::remove(path, ec);
        }
        throw;
    }
}

// ---------------------------------------------------------------------------
// sweep

std::vector<double> parse_snr_grid(const std::string& text) {
    std::vector<double> grid;
    auto parse_double = [](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw ValidationError("bad SNR value: '" + s + "'");
        }
        if (used != s.size()) throw ValidationError("bad SNR value: '" + s + "'");
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(part);
        if (parts.size() != 3)
            throw ValidationError("SNR range must be start:stop:step, got '" + text + "'");
        double start = parse_double(parts[0]);
        double stop = parse_double(parts[1]);
        double step = parse_double(parts[2]);
        if (!(step > 0.0)) throw ValidationError("SNR step must be positive");
        if (stop < start) throw ValidationError("SNR range is empty");
        for (int i = 0;; ++i) {
            double v = start + i * step;
            if (v > stop + 1e-9) break;
            grid.push_back(v);
        }
    } else {
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) grid.push_back(parse_double(part));
    }
    if (grid.empty()) throw ValidationError("SNR grid is empty");
    return grid;
}

struct LoadedArtifacts {
    CalibrationManifest manifest;
    ScenarioSpec spec;
    CodeBook book;
    InferenceBank bank;
};

LoadedArtifacts load_artifacts(const std::string& dir, bool with_bank) {
    LoadedArtifacts a;
    fs::path base(dir);
    a.manifest = load_manifest((base / "manifest.json").string());
    a.spec = load_scenario((base / a.manifest.scenario_file).string());
    if (scenario_hash(a.spec) != a.manifest.scenario_hash)
        throw ValidationError("scenario file does not match the calibrated scenario hash");

    ArtifactMeta book_meta;
    a.book = load_codebook((base / a.manifest.codebook_file).string(), &book_meta);
    if (book_meta.scenario_hash != a.manifest.scenario_hash)
        throw ValidationError("code book was calibrated against a different scenario");

    if (with_bank) {
        a.bank = load_bank((base / a.manifest.bank_file).string());
        if (a.bank.scenario_hash != a.manifest.scenario_hash)
            throw ValidationError("model bank was calibrated against a different scenario");
        if (a.bank.p_ref != a.manifest.p_ref)
            throw ValidationError("model bank reference power does not match the manifest");
    }
    return a;
}

std::vector<std::pair<std::string, std::string>> sweep_metadata(const LoadedArtifacts& a,
                                                                const std::string& snr_text,
                                                                int episodes, int symbols) {
    return {
        {"tool_version", kVersion},
        {"master_seed", CsvWriter::num(static_cast<std::uint64_t>(a.manifest.master_seed))},
        {"scenario_hash", CsvWriter::num(static_cast<std::uint64_t>(a.manifest.scenario_hash))},
        {"snr", snr_text},
        {"episodes_per_point", CsvWriter::num(episodes)},
        {"symbols_per_episode", CsvWriter::num(symbols)},
    };
}

int cmd_sweep(const std::string& dir, const std::string& snr_text, int episodes, int symbols) {
    if (episodes < 1) throw ValidationError("sweep needs >= 1 episode per point");
    std::vector<double> grid = parse_snr_grid(snr_text);
    LoadedArtifacts a = load_artifacts(dir, /*with_bank=*/true);
    if (symbols <= static_cast<int>(a.bank.mode_a_series.size()))
        throw ValidationError("sweep needs more symbols than the probe series length");

    MovingObjectChannel channel(a.spec);
    std::vector<SweepPoint> points =
        snr_sweep(channel, a.book, a.bank, a.manifest.ignorant_pair, grid, episodes, symbols,
                  derive_seed(a.manifest.master_seed, 0x53e9));

    auto meta = sweep_metadata(a, snr_text, episodes, symbols);
    fs::path base(dir);

    CsvWriter ber((base / "ber.csv").string(),
                  {"snr_db", "strategy", "ber", "ber_se", "episodes", "symbols"}, meta);
    CsvWriter accuracy((base / "accuracy.csv").string(),
                       {"snr_db", "strategy", "shape_accuracy", "shape_accuracy_se"}, meta);
    CsvWriter localization((base / "localization.csv").string(),
                           {"snr_db", "strategy", "position_error", "position_error_se"}, meta);
    CsvWriter levels((base / "levels.csv").string(),
                     {"snr_db", "strategy", "level0_mean", "level1_mean"}, meta);
    for (const SweepPoint& p : points) {
        const std::string snr = CsvWriter::num(p.snr_db);
        const std::string strat = strategy_name(p.strategy);
        ber.row({snr, strat, CsvWriter::num(p.ber), CsvWriter::num(p.ber_se),
                 CsvWriter::num(p.episodes), CsvWriter::num(p.symbols)});
        accuracy.row({snr, strat, CsvWriter::num(p.shape_accuracy),
                      CsvWriter::num(p.shape_accuracy_se)});
        localization.row({snr, strat, CsvWriter::num(p.position_error),
                          CsvWriter::num(p.position_error_se)});
        levels.row({snr, strat, CsvWriter::num(p.level0_mean), CsvWriter::num(p.level1_mean)});
    }
    ber.close();
    accuracy.close();
    localization.close();
    levels.close();
    std::cout << "wrote ber.csv, accuracy.csv, localization.csv, levels.csv in " << dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// figures

int cmd_figures(const std::string& dir, int n_random, int n_probes) {
    LoadedArtifacts a = load_artifacts(dir, /*with_bank=*/false);
    const std::uint64_t seed = derive_seed(a.manifest.master_seed, 0xf195);
    fs::path base(dir);
    std::vector<std::pair<std::string, std::string>> meta = {
        {"tool_version", kVersion},
        {"master_seed", CsvWriter::num(static_cast<std::uint64_t>(a.manifest.master_seed))},
        {"scenario_hash", CsvWriter::num(static_cast<std::uint64_t>(a.manifest.scenario_hash))},
    };

    // Channel constellations at two contexts: random configs against the
    // code-book pair and a pair optimized exactly at the probed state.
    {
        const PerturberState states[] = {{0.2, Shape::Cross}, {0.8, Shape::Square}};
        CsvWriter csv((base / "constellation.csv").string(),
                      {"state", "p", "shape", "kind", "re", "im", "magnitude"}, meta);
        for (int i = 0; i < 2; ++i) {
            const PerturberState& state = states[i];
            ChannelWorkspace ws(compile_scenario(a.spec, state));
            std::vector<std::pair<std::string, ConfigPair>> pairs;
            pairs.emplace_back("book", a.book.lookup(state.p, state.shape).pair);
            pairs.emplace_back("exact", optimize_pair(ws, derive_seed(seed, 0xac7, i)));
            auto points = rssi_constellation(ws, n_random, pairs, derive_seed(seed, 0xc0, i));
            const std::string label = i == 0 ? "A" : "B";
            for (const ConstellationPoint& pt : points) {
                csv.row({label, CsvWriter::num(state.p), shape_name(state.shape), pt.kind,
                         CsvWriter::num(pt.h.real()), CsvWriter::num(pt.h.imag()),
                         CsvWriter::num(std::abs(pt.h))});
            }
        }
        csv.close();
    }

    // Greedy search trace at the default perturber state.
    {
        ChannelWorkspace ws(compile_scenario(a.spec, a.spec.object.default_state));
        Objective objective(ObjectiveKind::MaxRssi, {&ws});
        PoolResult pool = random_pool_best(objective, 100, derive_seed(seed, 0x97e));
        GreedyResult greedy = greedy_bitflip(objective, pool.config);
        CsvWriter csv((base / "greedy_trace.csv").string(),
                      {"iteration", "sweep", "pixel", "accepted", "score"}, meta);
        for (const GreedyTraceEntry& e : greedy.trace) {
            csv.row({CsvWriter::num(e.iteration), CsvWriter::num(e.sweep),
                     CsvWriter::num(e.pixel), e.accepted ? "1" : "0", CsvWriter::num(e.score)});
        }
        csv.close();
    }

    // Separation retained by code-book lookup vs. per-state optimization.
    {
        Trajectory traj{a.spec.trajectory};
        const double length = traj.length();
        std::vector<double> resolutions = {length / 2.0, length / 4.0, length / 16.0,
                                           length / 64.0};
        auto points = resolution_sweep(a.spec, resolutions, n_probes, derive_seed(seed, 0x9e5));
        CsvWriter csv((base / "resolution.csv").string(),
                      {"resolution", "bins", "mean_ratio", "se_ratio"}, meta);
        for (const ResolutionPoint& p : points) {
            int bins = static_cast<int>(std::ceil(length / p.resolution - 1e-12));
            csv.row({CsvWriter::num(p.resolution), CsvWriter::num(bins),
                     CsvWriter::num(p.mean_ratio), CsvWriter::num(p.se_ratio)});
        }
        csv.close();
    }

    std::cout << "wrote constellation.csv, greedy_trace.csv, resolution.csv in " << dir << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Coupled-dipole RIS simulator: scenario validation, calibration, "
                 "communication sweeps and figure data"};
    app.require_subcommand(1);

    std::string scenario_path;
    CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();

    CalibrateArgs cal;
    CLI::App* calibrate =
        app.add_subcommand("calibrate", "Build the code book and sensing models");
    calibrate->add_option("--scenario", cal.scenario_path, "Scenario JSON file")->required();
    calibrate->add_option("--seed", cal.seed, "Master seed");
    calibrate->add_option("--resolution", cal.resolution, "Code-book bin width (wavelengths)")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--out", cal.out_dir, "Output directory")->required();
    calibrate->add_option("--pool", cal.pool, "Random pool size per optimization")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--series-length", cal.series_length, "Probe series length")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--mode-a-positions", cal.mode_a_positions,
                          "Perturber samples for the probe-series models")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--mode-a-draws", cal.mode_a_draws, "Noise draws per sample (mode A)")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--mode-b-positions", cal.mode_b_positions,
                          "Perturber samples for the per-config models")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--mode-b-draws", cal.mode_b_draws, "Noise draws per sample (mode B)")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--epochs-a", cal.epochs_a, "Training epochs (mode A)")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--epochs-b", cal.epochs_b, "Training epochs (mode B)")
        ->check(CLI::PositiveNumber);

    std::string artifacts_dir;
    std::string snr_text = "-10:30:10";
    int episodes = 4;
    int symbols = 510;
    CLI::App* sweep = app.add_subcommand("sweep", "Run the strategy-by-SNR benchmark");
    sweep->add_option("--artifacts", artifacts_dir, "Calibration output directory")->required();
    sweep->add_option("--snr", snr_text, "SNR grid in dB: start:stop:step or a,b,c");
    sweep->add_option("--episodes", episodes, "Episodes per grid point")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--symbols", symbols, "Symbols per episode (includes bootstrap)")
        ->check(CLI::PositiveNumber);

    std::string figures_dir;
    int fig_random = 100;
    int fig_probes = 24;
    CLI::App* figures = app.add_subcommand("figures", "Emit plot-ready CSV data");
    figures->add_option("--artifacts", figures_dir, "Calibration output directory")->required();
    figures->add_option("--random-configs", fig_random, "Random configs per constellation")
        ->check(CLI::PositiveNumber);
    figures->add_option("--probes", fig_probes, "Evaluation states for the resolution curve")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(validate)) return cmd_validate(scenario_path);
        if (app.got_subcommand(calibrate)) return cmd_calibrate(cal);
        if (app.got_subcommand(sweep)) return cmd_sweep(artifacts_dir, snr_text, episodes, symbols);
        if (app.got_subcommand(figures)) return cmd_figures(figures_dir, fig_random, fig_probes);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.push_back("risim");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const std::string& s : full) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace risim
