#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "risim/inference.hpp"
#include "risim/optimizer.hpp"
#include "risim/physics.hpp"
#include "risim/scenario.hpp"

namespace risim {

// SNR is defined against a scenario-level reference power, not per-symbol:
// sigma^2 = p_ref * 10^(-snr_db/10). An infinite snr_db disables noise.
struct NoiseModel {
    double snr_db = std::numeric_limits<double>::infinity();
    double p_ref = 1.0;

    bool noiseless() const { return std::isinf(snr_db) && snr_db > 0.0; }
    double sigma2() const;
};

// Circularly symmetric complex Gaussian: variance sigma2/2 per quadrature.
// Draw order is fixed (real then imaginary).
Complex add_awgn(Complex z, double sigma2, Rng& rng);

// BASK threshold detector: magnitude above tau reads as bit 1.
bool bask_detect(Complex y, double tau);

// Mean UE channel power over random perturber states and random configs,
// used as the SNR reference for the whole scenario.
double reference_power(const ScenarioSpec& spec, int n_states, int n_configs_per_state,
                       std::uint64_t seed);
// Same average for one fixed state and an explicit config list.
double mean_ue_power(const ChannelWorkspace& state, const std::vector<RISConfig>& configs);

// Per-symbol channel evaluation with the perturbing object moving between
// symbols. The static part of the interaction matrix (everything but the
// object) is assembled once; each symbol only fills the object rows and
// refactorizes.
class MovingObjectChannel {
  public:
    explicit MovingObjectChannel(const ScenarioSpec& spec);

    ChannelSample evaluate(const PerturberState& state, const RISConfig& config) const;

    const ScenarioSpec& spec() const { return spec_; }

  private:
    ScenarioSpec spec_;
    Trajectory trajectory_;
    double frequency_ = kWorkingFrequency;
    Complex inv_alpha_on_ = 0.0;
    Complex inv_alpha_off_ = 0.0;
    Complex inv_alpha_object_ = 0.0;
    bool object_active_ = false;
    std::vector<Vec2> static_pos_;       // active static dipoles, compile order
    std::vector<Complex> static_diag_;   // 1/alpha per static dipole (off-state for RIS)
    std::vector<int> ris_slot_of_pixel_; // pixel -> first of 4 consecutive slots, -1 if inert
    Eigen::MatrixXcd static_block_;      // -G between static dipoles, zero diagonal
    int ue_slot_ = -1;
    std::vector<int> aux_slots_;
    int tx_slot_ = -1;
};

enum class Strategy { SelfAdaptive, PerfectContext, ContextIgnorant };
inline constexpr int kNumStrategies = 3;
const char* strategy_name(Strategy s);

struct EpisodeSpec {
    int n_symbols = 500;         // includes the bootstrap prefix
    double snr_db = 20.0;
    Strategy strategy = Strategy::SelfAdaptive;
    double walk_step = 0.01;     // uniform step half-width on the trajectory parameter
    double shape_change_prob = 0.01;
    std::uint64_t seed = 1;
};

struct EpisodeMetrics {
    int n_bits = 0;
    int n_bit_errors = 0;
    double ber = 0.0;
    // Sensing quality of the per-symbol estimates against the true state at
    // the measured symbol. NaN for the context-ignorant strategy, which never
    // estimates; 1 and 0 for perfect context.
    double shape_accuracy = 0.0;
    double position_error = 0.0;  // mean |p_hat - p| * L, wavelengths of arc
    // Mean received magnitude per transmitted bit value.
    double level0_mean = 0.0;
    double level1_mean = 0.0;
};

// One communication episode: the object random-walks along the trajectory,
// the RIS keys each bit with the active config pair, and the strategy decides
// how that pair is chosen. Self-adaptive runs a probe-series bootstrap, then
// re-estimates the context from each symbol's aux measurements with a
// one-symbol lag. The bootstrap prefix (the probe series length) carries no
// data bits for any strategy, so metrics cover the same symbols everywhere.
EpisodeMetrics run_episode(const MovingObjectChannel& channel, const CodeBook& book,
                           const InferenceBank& bank, const ConfigPair& ignorant_pair,
                           const EpisodeSpec& spec);

struct SweepPoint {
    double snr_db = 0.0;
    Strategy strategy = Strategy::SelfAdaptive;
    int episodes = 0;
    int symbols = 0;  // data symbols accumulated over the episodes
    double ber = 0.0;
    double ber_se = 0.0;  // standard error over episodes
    double shape_accuracy = 0.0;
    double shape_accuracy_se = 0.0;
    double position_error = 0.0;
    double position_error_se = 0.0;
    double level0_mean = 0.0;
    double level1_mean = 0.0;
};

// Full strategy-by-SNR grid. Episode seeds derive from (master_seed, snr bit
// pattern, strategy, episode), so any sub-grid reproduces the full run's
// numbers.
std::vector<SweepPoint> snr_sweep(const MovingObjectChannel& channel, const CodeBook& book,
                                  const InferenceBank& bank, const ConfigPair& ignorant_pair,
                                  const std::vector<double>& snr_grid_db, int episodes_per_point,
                                  int symbols_per_episode, std::uint64_t master_seed);

struct ConstellationPoint {
    std::string kind;  // "random", "<label>_c0" or "<label>_c1"
    Complex h;
};

// Complex UE channel values of random configs plus labelled config pairs at
// one state; raw material for constellation plots.
std::vector<ConstellationPoint> rssi_constellation(
    const ChannelWorkspace& state, int n_random,
    const std::vector<std::pair<std::string, ConfigPair>>& pairs, std::uint64_t seed);

}  // namespace risim
