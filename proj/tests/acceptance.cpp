// Acceptance gate: nine end-to-end criteria on the shipped default scenario,
// one verdict line each. Exit code 0 only if every criterion passes.
//
// Thresholds are pinned here on purpose; loosening one to make a run green
// defeats the point of the gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "risim/artifacts.hpp"
#include "risim/bessel.hpp"
#include "risim/cli.hpp"
#include "risim/inference.hpp"
#include "risim/optimizer.hpp"
#include "risim/physics.hpp"
#include "risim/pipeline.hpp"
#include "risim/rng.hpp"
#include "risim/scenario.hpp"

namespace {

using risim::Complex;

// --- pinned tolerances ------------------------------------------------------
constexpr double kReciprocityTol = 1e-10;      // relative, 20 random scenes
constexpr double kSolveVsInverseTol = 1e-12;   // block-norm relative
constexpr double kBornSeriesTol = 1e-6;        // block-norm relative, weak scattering
constexpr double kWoodburyTol = 1e-8;          // absolute channel difference
constexpr double kBesselTol = 1e-9;            // J0(1), Y0(1) vs power series
constexpr double kOpenNonlinearityMax = 0.05;  // free-space layout
constexpr double kRoomOverOpenFactor = 5.0;    // reverberant vs free space
constexpr double kGainUpDb = 6.0;              // optimized '1' above random mean
constexpr double kGainDownDb = -10.0;          // optimized '0' below random mean
constexpr int kGainStatesNeeded = 8;           // out of 10 sampled states
constexpr double kCrossContextLoss = 0.5;      // mean dB-separation loss at far states
constexpr double kResolutionGap = 0.15;        // ratio(L/64) - ratio(L/2), 2-SE backed
constexpr double kShapeAcc20 = 0.9;            // held-out accuracy at 20 dB
constexpr double kPosErr20Lambda = 0.25;       // held-out MAE at 20 dB, wavelengths
constexpr double kShapeAccLowMin = 0.23;       // at -10 dB: random-guess band
constexpr double kShapeAccLowMax = 0.43;
constexpr double kPosErrBaselineBand = 0.25;   // at -10 dB: MAE within 25% of uninformed
constexpr double kGradCheckTol = 1e-4;         // finite-difference relative error
constexpr double kBerFloorLow = 0.4;           // all strategies at -10 dB, 2-SE
constexpr double kBerCeiling = 0.5;
constexpr double kIgnorantOverAdaptive = 1.5;  // at 30 dB, when BER(SA) >= 1e-3
constexpr double kBerSaGate = 1e-3;
constexpr double kCrossoverMaxSnr = 10.0;      // ignorant beats self-adaptive by here
constexpr double kTercileAccSpread = 0.15;     // shape accuracy across position terciles
constexpr double kPerShapeErrSpread = 0.1;     // localization MAE across shapes, wavelengths
constexpr double kEpisodeModeBAcc = 0.85;      // in-episode shape accuracy at 20 dB

struct Verdict {
    bool pass = false;
    std::string detail;
};

// Cross-criterion carriers: the invariant verdicts at the end reuse results
// that the numbered criteria already paid for.
struct IndependenceStats {
    double tercile_spread = 0.0;
    double shape_spread_lambda = 0.0;
};
std::optional<IndependenceStats> g_independence;
std::optional<std::vector<risim::SweepPoint>> g_sweep;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// --- criterion 1 helpers ----------------------------------------------------

std::vector<risim::Dipole> random_cloud(int n, std::uint64_t seed) {
    risim::Rng rng = risim::make_rng(seed);
    std::vector<risim::Dipole> dipoles;
    while (static_cast<int>(dipoles.size()) < n) {
        risim::Vec2 p{risim::uniform_real(rng, 0.0, 9.0), risim::uniform_real(rng, 0.0, 9.0)};
        bool ok = true;
        for (const risim::Dipole& d : dipoles)
            if (risim::distance(d.pos, p) < 5e-2) ok = false;
        if (!ok) continue;
        risim::DipoleProperties props{risim::uniform_real(rng, 0.8, 1.3),
                                      risim::uniform_real(rng, 0.05, 0.3),
                                      risim::uniform_real(rng, 0.2, 1.0)};
        dipoles.push_back({p, props});
    }
    return dipoles;
}

long double j0_series(long double x) {
    long double term = 1.0L, sum = 1.0L;
    const long double q = -x * x / 4.0L;
    for (int k = 1; k <= 40; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
    }
    return sum;
}

long double y0_series(long double x) {
    const long double pi = 3.14159265358979323846264338327950288L;
    const long double euler = 0.5772156649015328606065L;
    long double term = 1.0L, sum = 0.0L, harmonic = 0.0L;
    const long double q = -x * x / 4.0L;
    for (int k = 1; k <= 40; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        harmonic += 1.0L / k;
        sum += -term * harmonic;  // sum_k (-1)^{k+1} H_k (x^2/4)^k / (k!)^2
    }
    return 2.0L / pi * ((std::log(x / 2.0L) + euler) * j0_series(x) + sum);
}

Verdict criterion_physics() {
    // Reciprocity across random scenes.
    double worst_recip = 0.0;
    for (int s = 0; s < 20; ++s) {
        const auto cloud = random_cloud(8 + (s % 5) * 8, 1000 + s);
        const int n = static_cast<int>(cloud.size());
        const int a = s % n;
        const int b = (s * 7 + 3) % n;
        if (a == b) continue;
        const Complex hab = risim::channel_matrix(cloud, {a}, {b}, 1.0).h(0, 0);
        const Complex hba = risim::channel_matrix(cloud, {b}, {a}, 1.0).h(0, 0);
        worst_recip = std::max(worst_recip, std::abs(hab - hba) / std::abs(hab));
    }

    // LU solve against a dense inverse.
    const auto cloud = random_cloud(40, 7);
    const Eigen::MatrixXcd w = risim::assemble_interaction_matrix(cloud, 1.0);
    const Eigen::MatrixXcd winv = w.inverse();
    std::vector<int> rx(10), tx(10);
    for (int i = 0; i < 10; ++i) {
        rx[i] = i;
        tx[i] = 30 + i;
    }
    const Eigen::MatrixXcd h = risim::channel_matrix(cloud, rx, tx, 1.0).h;
    Eigen::MatrixXcd block(10, 10);
    for (int r = 0; r < 10; ++r)
        for (int t = 0; t < 10; ++t) block(r, t) = winv(rx[r], tx[t]);
    const double solve_err =
        (h - block).cwiseAbs().maxCoeff() / block.cwiseAbs().maxCoeff();

    // Born series on a weakly scattering instance.
    auto weak = random_cloud(8, 11);
    for (risim::Dipole& d : weak) d.props.gamma = 0.02;
    const int n = static_cast<int>(weak.size());
    Eigen::MatrixXcd goff = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd alpha = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        alpha(i, i) = risim::lorentzian_polarizability(1.0, weak[i].props);
        for (int j = 0; j < n; ++j)
            if (i != j) goff(i, j) = risim::greens_2d(2.0 * M_PI, weak[i].pos, weak[j].pos);
    }
    Eigen::MatrixXcd series = alpha;
    Eigen::MatrixXcd power = alpha;
    for (int m = 0; m < 120; ++m) {
        power = alpha * goff * power;
        series += power;
    }
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    const Eigen::MatrixXcd h_lu = risim::channel_matrix(weak, all, all, 1.0).h;
    const double born_err =
        (series - h_lu).cwiseAbs().maxCoeff() / h_lu.cwiseAbs().maxCoeff();

    // Low-rank update against full factorization on the default room.
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    const risim::ChannelWorkspace ws(risim::compile_scenario(spec, {}));
    double wood_err = 0.0;
    risim::Rng rng = risim::make_rng(33);
    for (int i = 0; i < 14; ++i) {
        risim::RISConfig cfg{static_cast<std::uint32_t>(rng()) & risim::RISConfig::kMask};
        if (i == 12) cfg.bits = 0u;
        if (i == 13) cfg.bits = risim::RISConfig::kMask;
        const risim::ChannelSample fast = ws.evaluate(cfg);
        const risim::ChannelSample full = ws.evaluate_full(cfg);
        wood_err = std::max(wood_err, std::abs(fast.ue - full.ue));
        wood_err = std::max(wood_err, (fast.aux - full.aux).cwiseAbs().maxCoeff());
    }

    const double j0_err = std::abs(risim::bessel_j0(1.0) - static_cast<double>(j0_series(1.0L)));
    const double y0_err = std::abs(risim::bessel_y0(1.0) - static_cast<double>(y0_series(1.0L)));

    const bool pass = worst_recip < kReciprocityTol && solve_err < kSolveVsInverseTol &&
                      born_err < kBornSeriesTol && wood_err < kWoodburyTol &&
                      j0_err < kBesselTol && y0_err < kBesselTol;
    return {pass, "reciprocity " + fmt(worst_recip) + ", solve-vs-inverse " + fmt(solve_err) +
                      ", born " + fmt(born_err) + ", woodbury " + fmt(wood_err) + ", j0 " +
                      fmt(j0_err) + ", y0 " + fmt(y0_err)};
}

Verdict criterion_nonlinearity() {
    const double open_idx = risim::nonlinearity_index(
        risim::compile_scenario(risim::open_scenario_spec(), {}), 300, 17);
    const double room_idx = risim::nonlinearity_index(
        risim::compile_scenario(risim::default_scenario_spec(), {}), 300, 17);
    const bool pass =
        open_idx < kOpenNonlinearityMax && room_idx > kRoomOverOpenFactor * open_idx;
    return {pass, "open " + fmt(open_idx) + " (< " + fmt(kOpenNonlinearityMax) + "), room " +
                      fmt(room_idx) + " (> " + fmt(kRoomOverOpenFactor) + "x open)"};
}

Verdict criterion_optimization_gain() {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    risim::Rng rng = risim::make_rng(23);
    int good = 0;
    double worst_up = 1e9, worst_down = -1e9;
    for (int i = 0; i < 10; ++i) {
        const risim::PerturberState state{risim::uniform_real(rng, 0.0, 1.0),
                                          static_cast<risim::Shape>(rng() % 3)};
        const risim::ChannelWorkspace ws(risim::compile_scenario(spec, state));
        double mean = 0.0;
        for (const risim::RISConfig& c : risim::random_configs(100, 900 + i))
            mean += ws.evaluate(c).rssi();
        mean /= 100.0;
        const risim::ConfigPair pair = risim::optimize_pair(ws, 300 + i, 100);
        const double up = 20.0 * std::log10(pair.r1 / mean);
        const double down = 20.0 * std::log10(pair.r0 / mean);
        worst_up = std::min(worst_up, up);
        worst_down = std::max(worst_down, down);
        if (up >= kGainUpDb && down <= kGainDownDb) ++good;
    }
    return {good >= kGainStatesNeeded,
            std::to_string(good) + "/10 states (need >= " + std::to_string(kGainStatesNeeded) +
                "), weakest gain +" + fmt(worst_up) + " dB, weakest null " + fmt(worst_down) +
                " dB"};
}

Verdict criterion_greedy() {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    const risim::ChannelWorkspace ws(risim::compile_scenario(spec, {}));
    const risim::Objective objective(risim::ObjectiveKind::MaxRssi, {&ws});

    bool bracketed = true, monotone = true;
    for (int inst = 0; inst < 3; ++inst) {
        std::vector<int> pixels;
        for (int p = inst; p < 25; p += 2) pixels.push_back(p);  // 12-13 pixel subsets
        pixels.resize(10);
        const risim::PoolResult pool = risim::random_pool_best(objective, 40, 70 + inst);
        const risim::GreedyResult greedy = risim::greedy_bitflip(objective, pool.config, pixels);

        std::uint32_t outside = pool.config.bits;
        for (int p : pixels) outside &= ~(1u << p);
        double best = -1.0;
        for (std::uint32_t m = 0; m < (1u << pixels.size()); ++m) {
            std::uint32_t bits = outside;
            for (std::size_t b = 0; b < pixels.size(); ++b)
                if (m >> b & 1u) bits |= 1u << pixels[b];
            best = std::max(best, objective.score(risim::RISConfig{bits}));
        }
        if (!(greedy.score >= pool.score && greedy.score <= best + 1e-12)) bracketed = false;
        double prev = 0.0;
        for (const risim::GreedyTraceEntry& e : greedy.trace) {
            if (e.score < prev) monotone = false;
            prev = e.score;
        }
    }

    const risim::PoolResult pool = risim::random_pool_best(objective, 100, 5);
    const risim::GreedyResult full = risim::greedy_bitflip(objective, pool.config);
    const bool pass = bracketed && monotone && full.improving_sweeps >= 2;
    return {pass, std::string("oracle bracketing ") + (bracketed ? "ok" : "VIOLATED") +
                      ", trace monotone " + (monotone ? "ok" : "VIOLATED") +
                      ", full-search improving sweeps " + std::to_string(full.improving_sweeps) +
                      " (need >= 2)"};
}

Verdict criterion_cross_context() {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    risim::Rng rng = risim::make_rng(29);
    double retention_sum = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double p_a = risim::uniform_real(rng, 0.0, 1.0);
        const auto shape_a = static_cast<risim::Shape>(rng() % 3);
        double p_b = 0.0;
        risim::Shape shape_b = risim::Shape::Cross;
        do {
            p_b = risim::uniform_real(rng, 0.0, 1.0);
            shape_b = static_cast<risim::Shape>(rng() % 3);
        } while (std::abs(p_b - p_a) < 0.25);

        const risim::ChannelWorkspace ws_a(risim::compile_scenario(spec, {p_a, shape_a}));
        const risim::ConfigPair pair = risim::optimize_pair(ws_a, 500 + i, 100);
        const double sep_a = 20.0 * std::log10(pair.r1 / pair.r0);

        const risim::ChannelWorkspace ws_b(risim::compile_scenario(spec, {p_b, shape_b}));
        const double r1b = ws_b.evaluate(pair.c1).rssi();
        const double r0b = ws_b.evaluate(pair.c0).rssi();
        retention_sum += 20.0 * std::log10(r1b / r0b) / sep_a;
    }
    const double loss = 1.0 - retention_sum / 20.0;
    return {loss >= kCrossContextLoss,
            "mean dB-separation loss " + fmt(loss) + " (need >= " + fmt(kCrossContextLoss) +
                ") over 20 far-state draws"};
}

Verdict criterion_resolution() {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    const double length = risim::Trajectory{spec.trajectory}.length();
    const auto points =
        risim::resolution_sweep(spec, {length / 2.0, length / 64.0}, 50, 43, 100);
    const double diff = points[1].mean_ratio - points[0].mean_ratio;
    const double se = std::hypot(points[0].se_ratio, points[1].se_ratio);
    const bool pass = diff >= kResolutionGap && diff >= 2.0 * se;
    return {pass, "ratio(L/64) " + fmt(points[1].mean_ratio) + " vs ratio(L/2) " +
                      fmt(points[0].mean_ratio) + ", gap " + fmt(diff) + " (need >= " +
                      fmt(kResolutionGap) + " and >= 2 SE = " + fmt(2.0 * se) + ")"};
}

struct EvalResult {
    double acc = 0.0;
    double mae_frac = 0.0;
    double baseline_mae_frac = 0.0;
    double tercile_acc[3] = {0.0, 0.0, 0.0};   // shape accuracy per position tercile
    double shape_mae_frac[3] = {0.0, 0.0, 0.0};  // localization MAE per true shape
};

EvalResult evaluate_models(const risim::ModelPair& models, const risim::SensingDataset& data,
                           double train_mean_p) {
    int hits = 0;
    double mae = 0.0, base = 0.0;
    int t_hits[3] = {0, 0, 0}, t_n[3] = {0, 0, 0};
    double s_mae[3] = {0.0, 0.0, 0.0};
    int s_n[3] = {0, 0, 0};
    const int n = static_cast<int>(data.x.cols());
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd f = data.x.col(i);
        const bool hit = static_cast<int>(risim::predict_shape(models, f)) == data.shape[i];
        const double err = std::abs(risim::predict_position(models, f) - data.pos[i]);
        hits += hit;
        mae += err;
        base += std::abs(train_mean_p - data.pos[i]);
        const int t = std::min(2, static_cast<int>(data.pos[i] * 3.0));
        t_hits[t] += hit;
        ++t_n[t];
        s_mae[data.shape[i]] += err;
        ++s_n[data.shape[i]];
    }
    EvalResult r{static_cast<double>(hits) / n, mae / n, base / n, {}, {}};
    for (int k = 0; k < 3; ++k) {
        r.tercile_acc[k] = t_n[k] > 0 ? static_cast<double>(t_hits[k]) / t_n[k] : 0.0;
        r.shape_mae_frac[k] = s_n[k] > 0 ? s_mae[k] / s_n[k] : 0.0;
    }
    return r;
}

double gradient_check(const risim::MlpModel& model, const Eigen::MatrixXd& x,
                      const Eigen::MatrixXd& y) {
    risim::MlpGradients grads;
    risim::mlp_loss_and_gradients(model, x, y, &grads);
    risim::MlpModel probe = model;
    const double eps = 1e-6;
    double worst = 0.0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (int r = 0; r < model.weights[l].rows(); ++r) {
            for (int c = 0; c < model.weights[l].cols(); ++c) {
                probe.weights[l](r, c) = model.weights[l](r, c) + eps;
                const double up = risim::mlp_loss_and_gradients(probe, x, y, nullptr);
                probe.weights[l](r, c) = model.weights[l](r, c) - eps;
                const double dn = risim::mlp_loss_and_gradients(probe, x, y, nullptr);
                probe.weights[l](r, c) = model.weights[l](r, c);
                const double fd = (up - dn) / (2.0 * eps);
                worst = std::max(worst, std::abs(fd - grads.dw[l](r, c)) /
                                            std::max(1.0, std::abs(fd)));
            }
        }
        for (int r = 0; r < model.biases[l].size(); ++r) {
            probe.biases[l](r) = model.biases[l](r) + eps;
            const double up = risim::mlp_loss_and_gradients(probe, x, y, nullptr);
            probe.biases[l](r) = model.biases[l](r) - eps;
            const double dn = risim::mlp_loss_and_gradients(probe, x, y, nullptr);
            probe.biases[l](r) = model.biases[l](r);
            const double fd = (up - dn) / (2.0 * eps);
            worst = std::max(worst,
                             std::abs(fd - grads.db[l](r)) / std::max(1.0, std::abs(fd)));
        }
    }
    return worst;
}

Verdict criterion_inference() {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    const double length = risim::Trajectory{spec.trajectory}.length();
    const double p_ref = risim::reference_power(spec, 16, 32, risim::derive_seed(47, 0x9ef));
    const auto series = risim::random_configs(8, risim::derive_seed(47, 0x5e1e));

    const risim::DatasetSpec train_spec{300, 6, -10.0, 40.0, 0.1};
    const risim::SensingDataset data =
        risim::build_mode_a_dataset(spec, series, train_spec, p_ref, risim::derive_seed(47, 1));

    auto slice = [&](const std::vector<int>& idx, bool one_hot) {
        Eigen::MatrixXd x(data.x.rows(), idx.size());
        Eigen::MatrixXd y(one_hot ? 3 : 1, idx.size());
        y.setZero();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            x.col(i) = data.x.col(idx[i]);
            if (one_hot)
                y(data.shape[idx[i]], i) = 1.0;
            else
                y(0, i) = data.pos[idx[i]];
        }
        return std::make_pair(x, y);
    };
    const auto [xs, ys] = slice(data.train_cols, true);
    const auto [xvs, yvs] = slice(data.val_cols, true);
    const auto [xp, yp] = slice(data.train_cols, false);
    const auto [xvp, yvp] = slice(data.val_cols, false);

    risim::ModelPair models;
    models.shape_model = risim::init_mlp(static_cast<int>(data.x.rows()), {64, 64}, 3,
                                         risim::MlpModel::Head::Softmax, 101);
    models.position_model = risim::init_mlp(static_cast<int>(data.x.rows()), {64, 64}, 1,
                                            risim::MlpModel::Head::Scalar, 102);
    risim::TrainSpec ts{{64, 64}, 0.05, 0.9, 32, 150, 111};
    risim::train_mlp(models.shape_model, xs, ys, xvs, yvs, ts);
    ts.seed = 112;
    risim::train_mlp(models.position_model, xp, yp, xvp, yvp, ts);

    double train_mean_p = 0.0;
    for (int c : data.train_cols) train_mean_p += data.pos[c];
    train_mean_p /= static_cast<double>(data.train_cols.size());

    const risim::DatasetSpec at20{150, 2, 20.0, 20.0, 0.5};
    const risim::DatasetSpec atm10{150, 2, -10.0, -10.0, 0.5};
    const EvalResult e20 = evaluate_models(
        models, risim::build_mode_a_dataset(spec, series, at20, p_ref, 48), train_mean_p);
    const EvalResult em10 = evaluate_models(
        models, risim::build_mode_a_dataset(spec, series, atm10, p_ref, 49), train_mean_p);

    const double err20_lambda = e20.mae_frac * length;
    const double baseline_ratio = em10.mae_frac / em10.baseline_mae_frac;

    IndependenceStats ind;
    ind.tercile_spread = *std::max_element(e20.tercile_acc, e20.tercile_acc + 3) -
                         *std::min_element(e20.tercile_acc, e20.tercile_acc + 3);
    ind.shape_spread_lambda = (*std::max_element(e20.shape_mae_frac, e20.shape_mae_frac + 3) -
                               *std::min_element(e20.shape_mae_frac, e20.shape_mae_frac + 3)) *
                              length;
    g_independence = ind;

    // Finite-difference check on every architecture the bank trains.
    double grad_worst = 0.0;
    risim::Rng grng = risim::make_rng(53);
    auto random_batch = [&](int dim, int classes) {
        Eigen::MatrixXd x(dim, 5), y(classes, 5);
        y.setZero();
        for (int c = 0; c < 5; ++c) {
            for (int r = 0; r < dim; ++r) x(r, c) = risim::standard_normal(grng);
            if (classes > 1)
                y(static_cast<int>(grng() % classes), c) = 1.0;
            else
                y(0, c) = risim::standard_normal(grng);
        }
        return std::make_pair(x, y);
    };
    {
        auto [gx, gy] = random_batch(16, 3);
        grad_worst = std::max(grad_worst,
                              gradient_check(risim::init_mlp(16, {32, 32}, 3,
                                                             risim::MlpModel::Head::Softmax, 55),
                                             gx, gy));
    }
    {
        auto [gx, gy] = random_batch(16, 1);
        grad_worst = std::max(grad_worst,
                              gradient_check(risim::init_mlp(16, {32, 32}, 1,
                                                             risim::MlpModel::Head::Scalar, 56),
                                             gx, gy));
    }
    {
        auto [gx, gy] = random_batch(24, 3);
        grad_worst = std::max(grad_worst,
                              gradient_check(risim::init_mlp(24, {64, 64}, 3,
                                                             risim::MlpModel::Head::Softmax, 57),
                                             gx, gy));
    }
    {
        auto [gx, gy] = random_batch(24, 1);
        grad_worst = std::max(grad_worst,
                              gradient_check(risim::init_mlp(24, {64, 64}, 1,
                                                             risim::MlpModel::Head::Scalar, 58),
                                             gx, gy));
    }

    const bool pass = e20.acc >= kShapeAcc20 && err20_lambda <= kPosErr20Lambda &&
                      em10.acc >= kShapeAccLowMin && em10.acc <= kShapeAccLowMax &&
                      baseline_ratio >= 1.0 - kPosErrBaselineBand &&
                      baseline_ratio <= 1.0 + kPosErrBaselineBand &&
                      grad_worst < kGradCheckTol;
    return {pass, "20 dB: acc " + fmt(e20.acc) + ", err " + fmt(err20_lambda) +
                      " lambda; -10 dB: acc " + fmt(em10.acc) + ", err/baseline " +
                      fmt(baseline_ratio) + "; grad check " + fmt(grad_worst)};
}

Verdict criterion_isac(const std::vector<risim::SweepPoint>& points) {
    auto at = [&](double snr, risim::Strategy s) -> const risim::SweepPoint& {
        for (const risim::SweepPoint& p : points)
            if (p.snr_db == snr && p.strategy == s) return p;
        throw std::logic_error("missing sweep point");
    };
    using risim::Strategy;
    const auto& sa30 = at(30.0, Strategy::SelfAdaptive);
    const auto& pc30 = at(30.0, Strategy::PerfectContext);
    const auto& ci30 = at(30.0, Strategy::ContextIgnorant);

    std::string detail;
    bool pass = true;

    // (a) ordering at 30 dB, 2-SE slack; ratio clause gated on a resolvable BER.
    const bool order_ok =
        pc30.ber <= sa30.ber + 2.0 * std::hypot(pc30.ber_se, sa30.ber_se) &&
        sa30.ber <= ci30.ber + 2.0 * std::hypot(sa30.ber_se, ci30.ber_se);
    bool ratio_ok = true;
    if (sa30.ber >= kBerSaGate)
        ratio_ok = ci30.ber + 2.0 * ci30.ber_se >= kIgnorantOverAdaptive * sa30.ber;
    pass = pass && order_ok && ratio_ok;
    detail += "30 dB BER pc/sa/ci " + fmt(pc30.ber) + "/" + fmt(sa30.ber) + "/" + fmt(ci30.ber);
    if (sa30.ber < kBerSaGate) detail += " (ratio clause waived, sa < 1e-3)";

    // (b) significant crossover at low SNR.
    bool crossover = false;
    double crossover_snr = 0.0;
    for (const risim::SweepPoint& p : points) {
        if (p.snr_db > kCrossoverMaxSnr || p.strategy != Strategy::ContextIgnorant) continue;
        const auto& sa = at(p.snr_db, Strategy::SelfAdaptive);
        if (sa.ber - p.ber >= 2.0 * std::hypot(sa.ber_se, p.ber_se) && p.ber < sa.ber) {
            crossover = true;
            crossover_snr = p.snr_db;
        }
    }
    pass = pass && crossover;
    detail += crossover ? "; crossover at " + fmt(crossover_snr) + " dB"
                        : "; NO significant crossover <= 10 dB";

    // (c) BER saturates in [0.4, 0.5] at -10 dB for every strategy.
    bool floor_ok = true;
    for (Strategy s : {Strategy::SelfAdaptive, Strategy::PerfectContext,
                       Strategy::ContextIgnorant}) {
        const auto& p = at(-10.0, s);
        if (!(p.ber + 2.0 * p.ber_se >= kBerFloorLow && p.ber - 2.0 * p.ber_se <= kBerCeiling))
            floor_ok = false;
    }
    pass = pass && floor_ok;
    detail += std::string("; -10 dB floor ") + (floor_ok ? "in [0.4, 0.5]" : "OUT OF BAND");
    return {pass, detail};
}

Verdict criterion_determinism() {
    namespace fs = std::filesystem;
    const fs::path base = fs::path("acceptance_scratch");
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string scenario = (base / "scenario.json").string();
    risim::save_scenario(risim::default_scenario_spec(), scenario);

    auto calibrate = [&](const std::string& out) {
        return risim::run_cli({"calibrate", "--scenario", scenario, "--out", out, "--seed",
                               "13", "--resolution", "4", "--pool", "8", "--series-length",
                               "2", "--mode-a-positions", "10", "--mode-a-draws", "2",
                               "--mode-b-positions", "8", "--mode-b-draws", "2", "--epochs-a",
                               "4", "--epochs-b", "4"});
    };
    const std::string dir_a = (base / "calib_a").string();
    const std::string dir_b = (base / "calib_b").string();
    if (calibrate(dir_a) != 0 || calibrate(dir_b) != 0)
        return {false, "calibrate command failed"};

    bool artifacts_equal = true;
    const risim::CalibrationManifest manifest = risim::load_manifest(dir_a + "/manifest.json");
    for (const std::string& name : {std::string("manifest.json"), manifest.scenario_file,
                                    manifest.codebook_file, manifest.bank_file,
                                    manifest.report_file}) {
        if (risim::file_hash(dir_a + "/" + name) != risim::file_hash(dir_b + "/" + name))
            artifacts_equal = false;
    }

    auto sweep = [&]() {
        return risim::run_cli({"sweep", "--artifacts", dir_a, "--snr", "0,20", "--episodes",
                               "1", "--symbols", "8"});
    };
    if (sweep() != 0) return {false, "sweep command failed"};
    std::vector<std::uint64_t> first;
    const std::vector<std::string> csvs = {"ber.csv", "accuracy.csv", "localization.csv",
                                           "levels.csv"};
    for (const std::string& f : csvs) first.push_back(risim::file_hash(dir_a + "/" + f));
    if (sweep() != 0) return {false, "sweep rerun failed"};
    bool csv_equal = true;
    for (std::size_t i = 0; i < csvs.size(); ++i)
        if (risim::file_hash(dir_a + "/" + csvs[i]) != first[i]) csv_equal = false;

    fs::remove_all(base);
    const bool pass = artifacts_equal && csv_equal;
    return {pass, std::string("calibrate artifacts ") +
                      (artifacts_equal ? "byte-identical" : "DIFFER") + ", sweep csvs " +
                      (csv_equal ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
    using Clock = std::chrono::steady_clock;

    int failures = 0;
    std::vector<std::pair<std::string, std::function<Verdict()>>> table = {
        {"physics oracles", criterion_physics},
        {"nonlinearity separation", criterion_nonlinearity},
        {"optimization gain", criterion_optimization_gain},
        {"greedy correctness", criterion_greedy},
        {"cross-context degradation", criterion_cross_context},
        {"code-book resolution", criterion_resolution},
        {"inference quality", criterion_inference},
        {"isac benchmark", [] {
             const risim::ScenarioSpec spec = risim::default_scenario_spec();
             const std::uint64_t seed = 41;
             const double p_ref =
                 risim::reference_power(spec, 16, 32, risim::derive_seed(seed, 0x9ef));
             const risim::CodeBook book =
                 risim::build_codebook(spec, 0.2, risim::derive_seed(seed, 0xb00c), 100);
             std::vector<risim::PerturberState> states;
             risim::Rng rng = risim::make_rng(risim::derive_seed(seed, 0x16));
             for (int i = 0; i < 24; ++i)
                 states.push_back({risim::uniform_real(rng, 0.0, 1.0),
                                   static_cast<risim::Shape>(rng() % 3)});
             const risim::ConfigPair ignorant = risim::context_ignorant_pair(
                 spec, states, risim::derive_seed(seed, 0x16, 1), 100);
             const risim::InferenceBank bank = risim::build_inference_bank(
                 spec, book, p_ref, risim::derive_seed(seed, 0xba4c), {}, nullptr);
             risim::MovingObjectChannel channel(spec);
             g_sweep =
                 risim::snr_sweep(channel, book, bank, ignorant, {-10.0, 0.0, 10.0, 20.0, 30.0},
                                  10, 508, risim::derive_seed(seed, 0x53e9));
             return criterion_isac(*g_sweep);
         }},
        {"artifact determinism", criterion_determinism},
    };

    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto start = Clock::now();
        Verdict v;
        try {
            v = table[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(Clock::now() - start).count();
        if (!v.pass) ++failures;
        std::printf("[%zu/9] %s  %-26s %s  (%.1f s)\n", i + 1, v.pass ? "PASS" : "FAIL",
                    table[i].first.c_str(), v.detail.c_str(), dt);
        std::fflush(stdout);
    }

    // Module invariants that need the trained models and episode sweeps the
    // criteria above already produced.
    {
        Verdict v;
        if (g_independence) {
            v.pass = g_independence->tercile_spread < kTercileAccSpread &&
                     g_independence->shape_spread_lambda < kPerShapeErrSpread;
            v.detail = "accuracy spread over position terciles " +
                       fmt(g_independence->tercile_spread) + " (< " + fmt(kTercileAccSpread) +
                       "), error spread over shapes " + fmt(g_independence->shape_spread_lambda) +
                       " lambda (< " + fmt(kPerShapeErrSpread) + ")";
        } else {
            v.detail = "no inference evaluation available";
        }
        if (!v.pass) ++failures;
        std::printf("[invariant] %s  %-20s %s\n", v.pass ? "PASS" : "FAIL",
                    "parameter independence", v.detail.c_str());
    }
    {
        Verdict v;
        if (g_sweep) {
            for (const risim::SweepPoint& p : *g_sweep) {
                if (p.snr_db != 20.0 || p.strategy != risim::Strategy::SelfAdaptive) continue;
                v.pass = p.shape_accuracy + 2.0 * p.shape_accuracy_se >= kEpisodeModeBAcc;
                v.detail = "in-episode shape accuracy at 20 dB " + fmt(p.shape_accuracy) +
                           " +- " + fmt(p.shape_accuracy_se) + " (>= " + fmt(kEpisodeModeBAcc) +
                           ", 2-SE)";
            }
        } else {
            v.detail = "no sweep available";
        }
        if (!v.pass) ++failures;
        std::printf("[invariant] %s  %-20s %s\n", v.pass ? "PASS" : "FAIL",
                    "episode mode B sensing", v.detail.c_str());
    }

    if (failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    return 1;
}
