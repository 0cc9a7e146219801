#pragma once

#include <cstdint>
#include <vector>

#include "risim/physics.hpp"
#include "risim/rng.hpp"
#include "risim/scenario.hpp"

namespace risim {

// Higher score is always better; Min* kinds negate the RSSI so the greedy
// search only ever maximizes. Mean kinds average the UE RSSI over all bound
// states (the context-ignorant baseline optimizes through that average).
enum class ObjectiveKind { MaxRssi, MinRssi, MaxMeanRssi, MinMeanRssi };

class Objective {
  public:
    Objective(ObjectiveKind kind, std::vector<const ChannelWorkspace*> states);

    ObjectiveKind kind() const { return kind_; }
    // Mean UE RSSI of `config` over the bound states.
    double rssi(const RISConfig& config) const;
    double score(const RISConfig& config) const;

  private:
    ObjectiveKind kind_;
    std::vector<const ChannelWorkspace*> states_;
};

// Uniform draw over all 2^25 patterns.
RISConfig random_config(Rng& rng);
std::vector<RISConfig> random_configs(int n, std::uint64_t seed);

struct PoolResult {
    RISConfig config;
    double score = 0.0;
};

// Best of n uniformly random configurations; the seed fixes the draw.
PoolResult random_pool_best(const Objective& objective, int n, std::uint64_t seed);

struct GreedyTraceEntry {
    int iteration;  // 1-based count of tested flips
    int sweep;      // 1-based sweep the test belongs to
    int pixel;
    bool accepted;
    double score;   // best score after the accept/reject decision
};

struct GreedyResult {
    RISConfig config;
    double score = 0.0;
    std::vector<GreedyTraceEntry> trace;
    int sweeps = 0;            // sweeps executed, including the final no-change one
    int improving_sweeps = 0;  // sweeps that accepted at least one flip
};

// Ascending single-bit sweeps accepting strictly improving flips, repeated
// until a full sweep changes nothing. `pixels` restricts the search to a
// subset (used by the reduced oracle instances); empty means all 25.
GreedyResult greedy_bitflip(const Objective& objective, RISConfig start,
                            const std::vector<int>& pixels = {});

struct ConfigPair {
    RISConfig c0;  // engineered low-RSSI pattern (bit '0')
    RISConfig c1;  // engineered high-RSSI pattern (bit '1')
    double r0 = 0.0;
    double r1 = 0.0;
    double tau = 0.0;  // detection threshold (r0 + r1) / 2
};

// Greedy max and min searches seeded from the best of one shared random pool.
// Throws NumericalError if the search fails to separate the levels (r1 <= r0).
ConfigPair optimize_pair(const ChannelWorkspace& state, std::uint64_t seed, int n_pool = 100);

// Pair optimized for the average RSSI over >= 20 perturber samples; the
// threshold comes from the mean levels.
ConfigPair context_ignorant_pair(const ScenarioSpec& spec,
                                 const std::vector<PerturberState>& samples,
                                 std::uint64_t seed, int n_pool = 100);

struct CodeBookEntry {
    int bin = 0;
    Shape shape = Shape::Cross;
    double p_center = 0.0;
    ConfigPair pair;
};

struct CodeBook {
    double resolution = 0.0;         // bin width target in wavelengths of arc
    double trajectory_length = 0.0;  // wavelengths
    int bins = 0;
    // bin-major, shape-minor: entries[3*bin + shape]
    std::vector<CodeBookEntry> entries;

    const CodeBookEntry& entry(int bin, Shape shape) const;
    // Nearest bin center to the clamped estimate; exact midpoints resolve to
    // the lower bin.
    const CodeBookEntry& lookup(double p_hat, Shape shape) const;
};

// One optimized pair per (bin, shape). Bin count is ceil(L / resolution) and
// every entry derives its own seed from (master_seed, bin, shape), so the
// result is independent of build order.
CodeBook build_codebook(const ScenarioSpec& spec, double resolution, std::uint64_t master_seed,
                        int n_pool = 100);

struct ResolutionPoint {
    double resolution = 0.0;
    double mean_ratio = 0.0;  // lookup separation / exact separation, averaged
    double se_ratio = 0.0;    // standard error over evaluation states
};

// Separation retained by code-book lookup relative to optimizing exactly at
// each probe state, for several resolutions. Probe states and their exact
// pairs are shared across resolutions.
std::vector<ResolutionPoint> resolution_sweep(const ScenarioSpec& spec,
                                              const std::vector<double>& resolutions,
                                              int n_eval_states, std::uint64_t seed,
                                              int n_pool = 100);

// Separation of `pair` when the channel is evaluated at some other state:
// r1' - r0' where r' are the noiseless RSSIs of the pair configs there.
double pair_separation_at(const ChannelWorkspace& state, const ConfigPair& pair);

}  // namespace risim
