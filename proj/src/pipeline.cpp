#include "risim/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "risim/errors.hpp"
#include "risim/rng.hpp"

namespace risim {

double NoiseModel::sigma2() const {
    if (noiseless()) return 0.0;
    if (!(p_ref > 0.0)) throw std::invalid_argument("noise model: reference power must be > 0");
    return p_ref * std::pow(10.0, -snr_db / 10.0);
}

Complex add_awgn(Complex z, double sigma2, Rng& rng) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("add_awgn: negative noise variance");
    const double s = std::sqrt(0.5 * sigma2);
    const double re = standard_normal(rng);
    const double im = standard_normal(rng);
    return z + Complex(s * re, s * im);
}

bool bask_detect(Complex y, double tau) { return std::abs(y) > tau; }

double mean_ue_power(const ChannelWorkspace& state, const std::vector<RISConfig>& configs) {
    if (configs.empty()) throw std::invalid_argument("mean_ue_power: no configs");
    double sum = 0.0;
    for (const RISConfig& c : configs) sum += std::norm(state.evaluate(c).ue);
    return sum / static_cast<double>(configs.size());
}

double reference_power(const ScenarioSpec& spec, int n_states, int n_configs_per_state,
                       std::uint64_t seed) {
    if (n_states < 1 || n_configs_per_state < 1)
        throw std::invalid_argument("reference_power: need >= 1 state and config");
    double sum = 0.0;
    for (int i = 0; i < n_states; ++i) {
        std::uint64_t s = derive_seed(seed, 0x9ef, static_cast<std::uint64_t>(i));
        Rng rng = make_rng(s);
        PerturberState state;
        state.p = uniform_real(rng, 0.0, 1.0);
        state.shape = static_cast<Shape>(rng() % kNumShapes);
        ChannelWorkspace ws(compile_scenario(spec, state));
        sum += mean_ue_power(ws, random_configs(n_configs_per_state, derive_seed(s, 1)));
    }
    return sum / static_cast<double>(n_states);
}

// ---------------------------------------------------------------------------
// Per-symbol channel with a moving object

MovingObjectChannel::MovingObjectChannel(const ScenarioSpec& spec)
    : spec_(spec), trajectory_{spec.trajectory}, frequency_(spec.frequency) {
    CompiledScenario base = compile_scenario(spec, spec.object.default_state);

    const bool on_active = base.ris_on.gamma > 0.0;
    const bool off_active = base.ris_off.gamma > 0.0;
    if (on_active != off_active)
        throw ValidationError(
            "moving-object channel: RIS on/off properties must be both active or both inert");
    const bool ris_active = on_active;
    if (ris_active) {
        inv_alpha_on_ = 1.0 / lorentzian_polarizability(frequency_, base.ris_on);
        inv_alpha_off_ = 1.0 / lorentzian_polarizability(frequency_, base.ris_off);
    }

    object_active_ = spec.object.props.gamma > 0.0;
    if (object_active_)
        inv_alpha_object_ = 1.0 / lorentzian_polarizability(frequency_, spec.object.props);

    std::vector<bool> is_object(base.dipoles.size(), false);
    for (int i : base.sets.object) is_object[static_cast<std::size_t>(i)] = true;

    // Slot layout: active static dipoles in compile order. RIS elements of one
    // pixel are adjacent in that order, so a pixel's four slots are
    // consecutive.
    std::vector<int> slot_of(base.dipoles.size(), -1);
    for (std::size_t i = 0; i < base.dipoles.size(); ++i) {
        if (is_object[i]) continue;
        const Dipole& d = base.dipoles[i];
        bool active = d.props.gamma > 0.0;
        if (active) {
            slot_of[i] = static_cast<int>(static_pos_.size());
            static_pos_.push_back(d.pos);
            static_diag_.push_back(1.0 / lorentzian_polarizability(frequency_, d.props));
        }
    }
    if (static_pos_.empty())
        throw ValidationError("moving-object channel: no scattering dipoles besides the object");

    tx_slot_ = slot_of[static_cast<std::size_t>(base.sets.tx)];
    ue_slot_ = slot_of[static_cast<std::size_t>(base.sets.ue)];
    if (tx_slot_ < 0 || ue_slot_ < 0)
        throw ValidationError("moving-object channel: TX and UE must be scattering dipoles");
    for (int i : base.sets.aux) {
        int s = slot_of[static_cast<std::size_t>(i)];
        if (s < 0)
            throw ValidationError("moving-object channel: aux receivers must be scattering dipoles");
        aux_slots_.push_back(s);
    }

    ris_slot_of_pixel_.assign(static_cast<std::size_t>(base.num_pixels()), -1);
    if (ris_active) {
        for (int m = 0; m < base.num_pixels(); ++m)
            ris_slot_of_pixel_[static_cast<std::size_t>(m)] =
                slot_of[static_cast<std::size_t>(base.sets.ris[static_cast<std::size_t>(4 * m)])];
    }

    const double k = wavenumber(frequency_);
    const int ns = static_cast<int>(static_pos_.size());
    static_block_.setZero(ns, ns);
    for (int i = 0; i < ns; ++i) {
        for (int j = i + 1; j < ns; ++j) {
            Complex g = greens_2d(k, static_pos_[static_cast<std::size_t>(i)],
                                  static_pos_[static_cast<std::size_t>(j)]);
            static_block_(i, j) = -g;
            static_block_(j, i) = -g;
        }
    }
}

ChannelSample MovingObjectChannel::evaluate(const PerturberState& state,
                                            const RISConfig& config) const {
    const double k = wavenumber(frequency_);
    const int ns = static_cast<int>(static_pos_.size());

    std::vector<Vec2> object_pts;
    if (object_active_)
        object_pts = object_footprint(state.shape, trajectory_.point(state.p));
    const int no = static_cast<int>(object_pts.size());

    Eigen::MatrixXcd w(ns + no, ns + no);
    w.topLeftCorner(ns, ns) = static_block_;
    for (int i = 0; i < ns; ++i) w(i, i) = static_diag_[static_cast<std::size_t>(i)];
    for (std::size_t m = 0; m < ris_slot_of_pixel_.size(); ++m) {
        int s = ris_slot_of_pixel_[m];
        if (s < 0) continue;
        Complex inv = config.get(static_cast<int>(m)) ? inv_alpha_on_ : inv_alpha_off_;
        for (int t = 0; t < 4; ++t) w(s + t, s + t) = inv;
    }
    for (int a = 0; a < no; ++a) {
        const int row = ns + a;
        for (int i = 0; i < ns; ++i) {
            Complex g = greens_2d(k, object_pts[static_cast<std::size_t>(a)],
                                  static_pos_[static_cast<std::size_t>(i)]);
            w(row, i) = -g;
            w(i, row) = -g;
        }
        for (int b = 0; b < a; ++b) {
            Complex g = greens_2d(k, object_pts[static_cast<std::size_t>(a)],
                                  object_pts[static_cast<std::size_t>(b)]);
            w(row, ns + b) = -g;
            w(ns + b, row) = -g;
        }
        w(row, row) = inv_alpha_object_;
    }

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(w);
    const double cond = lu_pivot_ratio(lu);
    if (!(cond < kConditionLimit)) {
        std::ostringstream msg;
        msg << "moving-object channel: interaction matrix numerically singular "
            << "(condition estimate " << cond << ")";
        throw NumericalError(msg.str());
    }

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(ns + no);
    rhs(tx_slot_) = 1.0;
    Eigen::VectorXcd x = lu.solve(rhs);

    ChannelSample sample;
    sample.ue = x(ue_slot_);
    sample.aux.resize(static_cast<Eigen::Index>(aux_slots_.size()));
    for (std::size_t i = 0; i < aux_slots_.size(); ++i)
        sample.aux(static_cast<Eigen::Index>(i)) = x(aux_slots_[i]);
    return sample;
}

// ---------------------------------------------------------------------------
// Episodes

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::SelfAdaptive: return "self_adaptive";
        case Strategy::PerfectContext: return "perfect_context";
        case Strategy::ContextIgnorant: return "context_ignorant";
    }
    return "unknown";
}

namespace {

// Reflecting random walk on [0, 1] plus occasional shape swaps. One shared
// stream: step draw, then (always) the shape-change draws, so the state
// sequence is identical for every strategy run with the same seed.
void advance_state(PerturberState& state, const EpisodeSpec& spec, Rng& rng) {
    state.p += uniform_real(rng, -spec.walk_step, spec.walk_step);
    if (state.p < 0.0) state.p = -state.p;
    if (state.p > 1.0) state.p = 2.0 - state.p;
    state.p = std::clamp(state.p, 0.0, 1.0);
    const double u = uniform_real(rng, 0.0, 1.0);
    const std::uint64_t pick = rng() % 2;
    if (u < spec.shape_change_prob) {
        int cur = static_cast<int>(state.shape);
        int other = (cur + 1 + static_cast<int>(pick)) % kNumShapes;
        state.shape = static_cast<Shape>(other);
    }
}

Eigen::VectorXd noisy_fingerprint(const Eigen::VectorXcd& aux, double sigma2, Rng& rng) {
    Eigen::VectorXd f = fingerprint_from_aux(aux);
    const double s = std::sqrt(0.5 * sigma2);
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) += s * standard_normal(rng);
    return f;
}

}  // namespace

EpisodeMetrics run_episode(const MovingObjectChannel& channel, const CodeBook& book,
                           const InferenceBank& bank, const ConfigPair& ignorant_pair,
                           const EpisodeSpec& spec) {
    const int warmup = static_cast<int>(bank.mode_a_series.size());
    if (warmup < 1) throw std::invalid_argument("episode: bank has an empty probe series");
    if (spec.n_symbols <= warmup)
        throw std::invalid_argument("episode: need more symbols than the probe series length");
    if (!(bank.p_ref > 0.0)) throw std::invalid_argument("episode: bank reference power must be > 0");
    if (!(spec.walk_step >= 0.0 && spec.walk_step <= 1.0))
        throw std::invalid_argument("episode: walk step must be in [0, 1]");
    if (!(spec.shape_change_prob >= 0.0 && spec.shape_change_prob <= 1.0))
        throw std::invalid_argument("episode: shape change probability must be in [0, 1]");

    NoiseModel noise{spec.snr_db, bank.p_ref};
    const double sigma2 = noise.sigma2();
    const double traj_length = Trajectory{channel.spec().trajectory}.length();

    Rng rng = make_rng(spec.seed);
    PerturberState state;
    state.p = uniform_real(rng, 0.0, 1.0);
    state.shape = static_cast<Shape>(rng() % kNumShapes);

    // Probe-series bootstrap. All strategies consume the same draws so the
    // perturber trajectory depends only on the seed.
    Eigen::VectorXd mode_a_fp(16 * warmup);
    for (int t = 0; t < warmup; ++t) {
        ChannelSample sample = channel.evaluate(state, bank.mode_a_series[static_cast<std::size_t>(t)]);
        mode_a_fp.segment(16 * t, 16) = noisy_fingerprint(sample.aux, sigma2, rng);
        advance_state(state, spec, rng);
    }

    double p_hat = 0.5;
    Shape shape_hat = Shape::Cross;
    if (spec.strategy == Strategy::SelfAdaptive) {
        p_hat = predict_position(bank.mode_a, mode_a_fp);
        shape_hat = predict_shape(bank.mode_a, mode_a_fp);
    }

    EpisodeMetrics m;
    double level0_sum = 0.0, level1_sum = 0.0;
    int level0_n = 0, level1_n = 0;
    int shape_hits = 0;
    double pos_err_sum = 0.0;

    for (int t = warmup; t < spec.n_symbols; ++t) {
        const ConfigPair* pair = nullptr;
        switch (spec.strategy) {
            case Strategy::SelfAdaptive:
                pair = &book.lookup(p_hat, shape_hat).pair;
                break;
            case Strategy::PerfectContext:
                pair = &book.lookup(state.p, state.shape).pair;
                break;
            case Strategy::ContextIgnorant:
                pair = &ignorant_pair;
                break;
        }

        const bool bit = (rng() & 1u) != 0;
        const RISConfig& config = bit ? pair->c1 : pair->c0;
        ChannelSample sample = channel.evaluate(state, config);

        const Complex y = add_awgn(sample.ue, sigma2, rng);
        const bool detected = bask_detect(y, pair->tau);
        ++m.n_bits;
        m.n_bit_errors += (detected != bit);
        if (bit) {
            level1_sum += std::abs(y);
            ++level1_n;
        } else {
            level0_sum += std::abs(y);
            ++level0_n;
        }

        // Aux noise is drawn for every strategy to keep the stream layout
        // uniform; only self-adaptive acts on the measurement.
        Eigen::VectorXd fp = noisy_fingerprint(sample.aux, sigma2, rng);
        if (spec.strategy == Strategy::SelfAdaptive) {
            const ModelPair& models = mode_b_models(bank, config);
            Shape est_shape = predict_shape(models, fp);
            double est_p = predict_position(models, fp);
            shape_hits += (est_shape == state.shape);
            pos_err_sum += std::abs(est_p - state.p) * traj_length;
            // One-symbol lag: the estimate steers the next symbol's pair.
            p_hat = est_p;
            shape_hat = est_shape;
        }

        advance_state(state, spec, rng);
    }

    const double nd = static_cast<double>(m.n_bits);
    m.ber = static_cast<double>(m.n_bit_errors) / nd;
    m.level0_mean = level0_n > 0 ? level0_sum / level0_n : std::numeric_limits<double>::quiet_NaN();
    m.level1_mean = level1_n > 0 ? level1_sum / level1_n : std::numeric_limits<double>::quiet_NaN();
    switch (spec.strategy) {
        case Strategy::SelfAdaptive:
            m.shape_accuracy = static_cast<double>(shape_hits) / nd;
            m.position_error = pos_err_sum / nd;
            break;
        case Strategy::PerfectContext:
            m.shape_accuracy = 1.0;
            m.position_error = 0.0;
            break;
        case Strategy::ContextIgnorant:
            m.shape_accuracy = std::numeric_limits<double>::quiet_NaN();
            m.position_error = std::numeric_limits<double>::quiet_NaN();
            break;
    }
    return m;
}

namespace {

struct Accumulator {
    double sum = 0.0, sum_sq = 0.0;
    int n = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    double mean() const { return sum / n; }
    double se() const {
        if (n < 2) return 0.0;
        double m = mean();
        double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
        return std::sqrt(var / n);
    }
};

}  // namespace

std::vector<SweepPoint> snr_sweep(const MovingObjectChannel& channel, const CodeBook& book,
                                  const InferenceBank& bank, const ConfigPair& ignorant_pair,
                                  const std::vector<double>& snr_grid_db, int episodes_per_point,
                                  int symbols_per_episode, std::uint64_t master_seed) {
    if (episodes_per_point < 1) throw std::invalid_argument("snr_sweep: need >= 1 episode");
    if (snr_grid_db.empty()) throw std::invalid_argument("snr_sweep: empty SNR grid");

    constexpr Strategy kStrategies[] = {Strategy::SelfAdaptive, Strategy::PerfectContext,
                                        Strategy::ContextIgnorant};
    std::vector<SweepPoint> out;
    for (double snr : snr_grid_db) {
        for (Strategy strat : kStrategies) {
            SweepPoint point;
            point.snr_db = snr;
            point.strategy = strat;
            Accumulator ber, acc, err;
            double l0 = 0.0, l1 = 0.0;
            for (int e = 0; e < episodes_per_point; ++e) {
                EpisodeSpec es;
                es.n_symbols = symbols_per_episode;
                es.snr_db = snr;
                es.strategy = strat;
                // Seed from the SNR value, not its grid index, so a sub-grid
                // reproduces the full run point for point.
                es.seed = derive_seed(master_seed, std::bit_cast<std::uint64_t>(snr),
                                      static_cast<std::uint64_t>(strat),
                                      static_cast<std::uint64_t>(e));
                EpisodeMetrics m = run_episode(channel, book, bank, ignorant_pair, es);
                ber.add(m.ber);
                if (std::isfinite(m.shape_accuracy)) acc.add(m.shape_accuracy);
                if (std::isfinite(m.position_error)) err.add(m.position_error);
                l0 += m.level0_mean;
                l1 += m.level1_mean;
                point.symbols += m.n_bits;
            }
            point.episodes = episodes_per_point;
            point.ber = ber.mean();
            point.ber_se = ber.se();
            const double nan = std::numeric_limits<double>::quiet_NaN();
            point.shape_accuracy = acc.n > 0 ? acc.mean() : nan;
            point.shape_accuracy_se = acc.n > 0 ? acc.se() : nan;
            point.position_error = err.n > 0 ? err.mean() : nan;
            point.position_error_se = err.n > 0 ? err.se() : nan;
            point.level0_mean = l0 / episodes_per_point;
            point.level1_mean = l1 / episodes_per_point;
            out.push_back(point);
        }
    }
    return out;
}

std::vector<ConstellationPoint> rssi_constellation(
    const ChannelWorkspace& state, int n_random,
    const std::vector<std::pair<std::string, ConfigPair>>& pairs, std::uint64_t seed) {
    if (n_random < 0) throw std::invalid_argument("constellation: negative sample count");
    std::vector<ConstellationPoint> out;
    for (const RISConfig& c : random_configs(n_random, derive_seed(seed, 0xc0de)))
        out.push_back({"random", state.evaluate(c).ue});
    for (const auto& [label, pair] : pairs) {
        out.push_back({label + "_c0", state.evaluate(pair.c0).ue});
        out.push_back({label + "_c1", state.evaluate(pair.c1).ue});
    }
    return out;
}

}  // namespace risim
