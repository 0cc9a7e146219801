#include "risim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "risim/errors.hpp"
#include "risim/rng.hpp"

namespace risim {

Objective::Objective(ObjectiveKind kind, std::vector<const ChannelWorkspace*> states)
    : kind_(kind), states_(std::move(states)) {
    if (states_.empty()) throw std::invalid_argument("objective needs at least one channel state");
    for (const auto* s : states_) {
        if (s == nullptr) throw std::invalid_argument("objective received a null channel state");
    }
}

double Objective::rssi(const RISConfig& config) const {
    double sum = 0.0;
    for (const auto* s : states_) sum += s->evaluate(config).rssi();
    return sum / static_cast<double>(states_.size());
}

double Objective::score(const RISConfig& config) const {
    double r = rssi(config);
    switch (kind_) {
        case ObjectiveKind::MaxRssi:
        case ObjectiveKind::MaxMeanRssi:
            return r;
        case ObjectiveKind::MinRssi:
        case ObjectiveKind::MinMeanRssi:
            return -r;
    }
    return r;  // unreachable
}

RISConfig random_config(Rng& rng) {
    RISConfig c;
    c.bits = static_cast<std::uint32_t>(rng()) & RISConfig::kMask;
    return c;
}

std::vector<RISConfig> random_configs(int n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("random_configs: n must be >= 0");
    Rng rng = make_rng(seed);
    std::vector<RISConfig> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(random_config(rng));
    return out;
}

PoolResult random_pool_best(const Objective& objective, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("random_pool_best: pool size must be >= 1");
    Rng rng = make_rng(seed);
    PoolResult best;
    best.score = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        RISConfig c = random_config(rng);
        double s = objective.score(c);
        if (s > best.score) {
            best.score = s;
            best.config = c;
        }
    }
    return best;
}

GreedyResult greedy_bitflip(const Objective& objective, RISConfig start,
                            const std::vector<int>& pixels) {
    std::vector<int> order = pixels;
    if (order.empty()) {
        order.resize(RISConfig::kNumPixels);
        std::iota(order.begin(), order.end(), 0);
    }
    for (int p : order) {
        if (p < 0 || p >= RISConfig::kNumPixels)
            throw std::invalid_argument("greedy_bitflip: pixel index out of range: " +
                                        std::to_string(p));
    }

    GreedyResult result;
    result.config = start;
    result.score = objective.score(start);
    int iteration = 0;
    for (;;) {
        ++result.sweeps;
        bool changed = false;
        for (int pixel : order) {
            RISConfig candidate = result.config.with_flipped(pixel);
            double s = objective.score(candidate);
            ++iteration;
            bool accepted = s > result.score;  // strict: plateaus do not cycle
            if (accepted) {
                result.config = candidate;
                result.score = s;
                changed = true;
            }
            result.trace.push_back({iteration, result.sweeps, pixel, accepted, result.score});
        }
        if (!changed) break;
        ++result.improving_sweeps;
    }
    return result;
}

namespace {

// Shared random pool, then greedy refinement of both ends. All objectives are
// evaluated through `objective_states` so the same routine serves the
// single-state and mean-over-states cases.
ConfigPair pair_from_states(const std::vector<const ChannelWorkspace*>& states,
                            ObjectiveKind max_kind, ObjectiveKind min_kind, std::uint64_t seed,
                            int n_pool) {
    if (n_pool < 1) throw std::invalid_argument("optimize_pair: pool size must be >= 1");
    Objective max_obj(max_kind, states);
    Objective min_obj(min_kind, states);

    Rng rng = make_rng(seed);
    double best_hi = -std::numeric_limits<double>::infinity();
    double best_lo = std::numeric_limits<double>::infinity();
    RISConfig start_hi, start_lo;
    for (int i = 0; i < n_pool; ++i) {
        RISConfig c = random_config(rng);
        double r = max_obj.rssi(c);
        if (r > best_hi) {
            best_hi = r;
            start_hi = c;
        }
        if (r < best_lo) {
            best_lo = r;
            start_lo = c;
        }
    }

    GreedyResult hi = greedy_bitflip(max_obj, start_hi);
    GreedyResult lo = greedy_bitflip(min_obj, start_lo);

    ConfigPair pair;
    pair.c1 = hi.config;
    pair.c0 = lo.config;
    pair.r1 = hi.score;
    pair.r0 = -lo.score;
    if (!(pair.r1 > pair.r0))
        throw NumericalError("config pair search failed to separate levels: r1 = " +
                             std::to_string(pair.r1) + " <= r0 = " + std::to_string(pair.r0));
    pair.tau = 0.5 * (pair.r0 + pair.r1);
    return pair;
}

}  // namespace

ConfigPair optimize_pair(const ChannelWorkspace& state, std::uint64_t seed, int n_pool) {
    return pair_from_states({&state}, ObjectiveKind::MaxRssi, ObjectiveKind::MinRssi, seed,
                            n_pool);
}

ConfigPair context_ignorant_pair(const ScenarioSpec& spec,
                                 const std::vector<PerturberState>& samples, std::uint64_t seed,
                                 int n_pool) {
    if (samples.size() < 20)
        throw std::invalid_argument(
            "context_ignorant_pair: need >= 20 perturber samples, got " +
            std::to_string(samples.size()));
    std::vector<ChannelWorkspace> workspaces;
    workspaces.reserve(samples.size());
    for (const PerturberState& s : samples) workspaces.emplace_back(compile_scenario(spec, s));
    std::vector<const ChannelWorkspace*> refs;
    refs.reserve(workspaces.size());
    for (const ChannelWorkspace& w : workspaces) refs.push_back(&w);
    return pair_from_states(refs, ObjectiveKind::MaxMeanRssi, ObjectiveKind::MinMeanRssi, seed,
                            n_pool);
}

const CodeBookEntry& CodeBook::entry(int bin, Shape shape) const {
    if (bin < 0 || bin >= bins) throw std::out_of_range("code book bin out of range");
    return entries.at(static_cast<std::size_t>(3 * bin + static_cast<int>(shape)));
}

const CodeBookEntry& CodeBook::lookup(double p_hat, Shape shape) const {
    if (bins < 1) throw std::logic_error("lookup on an empty code book");
    double p = std::clamp(p_hat, 0.0, 1.0);
    double scaled = p * static_cast<double>(bins);
    int bin = static_cast<int>(std::floor(scaled));
    // An exact bin boundary is equidistant from the centers on either side;
    // resolve downward so the mapping is deterministic.
    if (bin > 0 && scaled == std::floor(scaled)) --bin;
    bin = std::min(bin, bins - 1);
    return entry(bin, shape);
}

CodeBook build_codebook(const ScenarioSpec& spec, double resolution, std::uint64_t master_seed,
                        int n_pool) {
    Trajectory traj{spec.trajectory};
    double length = traj.length();
    if (!(resolution > 0.0))
        throw std::invalid_argument("build_codebook: resolution must be positive");

    CodeBook book;
    book.resolution = resolution;
    book.trajectory_length = length;
    book.bins = static_cast<int>(std::ceil(length / resolution - 1e-12));
    if (book.bins < 1) book.bins = 1;
    book.entries.reserve(static_cast<std::size_t>(book.bins) * kNumShapes);

    for (int bin = 0; bin < book.bins; ++bin) {
        double p_center = (static_cast<double>(bin) + 0.5) / static_cast<double>(book.bins);
        for (int si = 0; si < kNumShapes; ++si) {
            PerturberState state{p_center, static_cast<Shape>(si)};
            ChannelWorkspace ws(compile_scenario(spec, state));
            std::uint64_t entry_seed = derive_seed(master_seed, static_cast<std::uint64_t>(bin),
                                                   static_cast<std::uint64_t>(si));
            CodeBookEntry entry;
            entry.bin = bin;
            entry.shape = static_cast<Shape>(si);
            entry.p_center = p_center;
            entry.pair = optimize_pair(ws, entry_seed, n_pool);
            book.entries.push_back(entry);
        }
    }
    return book;
}

double pair_separation_at(const ChannelWorkspace& state, const ConfigPair& pair) {
    return state.evaluate(pair.c1).rssi() - state.evaluate(pair.c0).rssi();
}

std::vector<ResolutionPoint> resolution_sweep(const ScenarioSpec& spec,
                                              const std::vector<double>& resolutions,
                                              int n_eval_states, std::uint64_t seed, int n_pool) {
    if (n_eval_states < 2)
        throw std::invalid_argument("resolution_sweep: need >= 2 evaluation states");

    // Probe states and their exactly-optimized pairs are independent of the
    // resolution under test, so compute them once.
    struct Probe {
        PerturberState state;
        ChannelWorkspace ws;
        double exact_sep;
    };
    std::vector<Probe> probes;
    probes.reserve(static_cast<std::size_t>(n_eval_states));
    for (int i = 0; i < n_eval_states; ++i) {
        std::uint64_t probe_seed = derive_seed(seed, 0xe7a1, static_cast<std::uint64_t>(i));
        Rng rng = make_rng(probe_seed);
        PerturberState state;
        state.p = uniform_real(rng, 0.0, 1.0);
        state.shape = static_cast<Shape>(rng() % kNumShapes);
        ChannelWorkspace ws(compile_scenario(spec, state));
        ConfigPair exact = optimize_pair(ws, derive_seed(probe_seed, 1), n_pool);
        double sep = exact.r1 - exact.r0;
        probes.push_back({state, std::move(ws), sep});
    }

    std::vector<ResolutionPoint> out;
    out.reserve(resolutions.size());
    for (double res : resolutions) {
        CodeBook book = build_codebook(spec, res, derive_seed(seed, 0xb00c), n_pool);
        double sum = 0.0, sum_sq = 0.0;
        for (const Probe& probe : probes) {
            const CodeBookEntry& e = book.lookup(probe.state.p, probe.state.shape);
            double ratio = pair_separation_at(probe.ws, e.pair) / probe.exact_sep;
            // A mismatched entry can invert the levels entirely; the ratio is
            // clamped so a handful of inversions cannot dominate the mean.
            ratio = std::clamp(ratio, -1.0, 1.0);
            sum += ratio;
            sum_sq += ratio * ratio;
        }
        double n = static_cast<double>(probes.size());
        double mean = sum / n;
        double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
        out.push_back({res, mean, std::sqrt(var / n)});
    }
    return out;
}

}  // namespace risim
