#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "risim/scenario.hpp"
#include "risim/types.hpp"

namespace risim {

// Channels whose interaction matrix has an estimated condition number above
// this are reported as numerically singular rather than silently inverted.
inline constexpr double kConditionLimit = 1e12;

// alpha(f) = gamma * f0^2 / (f0^2 - f^2 + j*chi*f). Purely imaginary and of
// magnitude gamma*f0/chi on resonance; gamma = 0 gives an inert dipole.
Complex lorentzian_polarizability(double f, const DipoleProperties& props);

// Outgoing-wave propagation kernel between two distinct points:
// G = (j/4) * H0^(2)(k * |r1 - r2|). Symmetric in its arguments.
Complex greens_2d(double k, Vec2 r1, Vec2 r2);

// W[i][i] = 1/alpha_i(f), W[i][j] = -G(2*pi*f, r_i, r_j). Symmetric, not
// Hermitian. Throws NumericalError when some alpha_i(f) vanishes and
// ValidationError on coincident positions or an empty list.
Eigen::MatrixXcd assemble_interaction_matrix(const std::vector<Dipole>& dipoles, double f);

// Cheap condition estimate from the LU pivot magnitudes. A proxy, not a true
// condition number, but it reliably flags the near-singular systems we care
// about while costing nothing beyond the factorization we already need.
double condition_estimate(const Eigen::MatrixXcd& w);
double lu_pivot_ratio(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu);

struct ChannelMatrix {
    // h(r, t) couples receiver_dipoles[r] to transmitter_dipoles[t].
    Eigen::MatrixXcd h;
    std::vector<int> receiver_dipoles;
    std::vector<int> transmitter_dipoles;
};

// Receiver-side view of one channel evaluation: the UE entry plus the eight
// aux-receiver entries, all for the single TX column.
struct ChannelSample {
    Complex ue;
    Eigen::VectorXcd aux;

    double rssi() const { return std::abs(ue); }
};

// Generic solve: rows of W^{-1} at `receivers`, columns at `transmitters`.
// Dipoles with gamma = 0 do not scatter and are excluded from the system;
// receivers and transmitters must be active. Throws NumericalError when the
// condition estimate exceeds kConditionLimit.
ChannelMatrix channel_matrix(const std::vector<Dipole>& dipoles,
                             const std::vector<int>& receivers,
                             const std::vector<int>& transmitters, double f);

// Channel of a compiled scenario at the RIS pattern its properties currently
// reflect. Receivers are the UE followed by the aux array; the transmitter is
// the TX dipole.
ChannelMatrix channel_matrix(const CompiledScenario& scenario);

// Convenience: compile at `state`, apply `config`, solve.
ChannelMatrix channel_matrix(const ScenarioSpec& spec, const RISConfig& config,
                             const PerturberState& state);

ChannelSample to_sample(const ChannelMatrix& cm);

// Factorizes one scenario state once, then evaluates any RIS configuration by
// a rank-k update of the cached inverse panel: a configuration change touches
// only the diagonal entries of the flipped elements, so the update costs
// O(k^3 + k*N_panel) instead of a fresh O(N^3) factorization.
class ChannelWorkspace {
  public:
    // The scenario's currently applied config becomes the update baseline.
    // Requires the RIS on/off properties to be both active or both inert;
    // mixed support would change the matrix sparsity pattern, which a
    // diagonal update cannot express.
    explicit ChannelWorkspace(CompiledScenario scenario);

    const CompiledScenario& scenario() const { return scenario_; }
    const RISConfig& base_config() const { return scenario_.config; }

    ChannelSample base_channel() const;

    // Exact channel at `config` (falls back to a fresh factorization if the
    // update system is numerically singular).
    ChannelSample evaluate(const RISConfig& config) const;

    // Raw diagonal update: dipole_indices must be RIS element dipoles present
    // in the factorized system; new_diagonals are replacement 1/alpha values.
    // Throws NumericalError if the update system is singular (caller decides
    // whether to fall back to a full re-inversion).
    ChannelMatrix woodbury_diag_update(const std::vector<int>& dipole_indices,
                                       const std::vector<Complex>& new_diagonals) const;

    // Entry of the factorized base inverse, restricted to the cached panel:
    // rows at receivers or RIS elements, columns at RIS elements or the TX.
    Complex base_inverse_entry(int row_dipole, int col_dipole) const;

    // The full-solve path used as fallback; exposed so callers can
    // cross-check the update path against it.
    ChannelSample evaluate_full(const RISConfig& config) const;

  private:
    CompiledScenario scenario_;
    Complex inv_alpha_on_ = 0.0;
    Complex inv_alpha_off_ = 0.0;
    bool ris_active_ = true;
    int n_rx_ = 0;
    // panel_ holds the base-inverse block with rows (receivers..., active RIS
    // elements...) and columns (active RIS elements..., TX).
    Eigen::MatrixXcd panel_;
    std::vector<int> panel_rows_;       // dipole index per panel row
    std::vector<int> panel_cols_;       // dipole index per panel column
    std::vector<int> ris_slot_;         // RIS element order -> panel column, -1 if inert
};

// Residual of the best affine fit of H_UE,TX as a function of the 25 pixel
// bits, over n_samples random configurations, normalized by the total norm.
// 0 means the channel is exactly affine in the bits; rich scattering pushes
// it up. Requires n_samples >= 10 * 26.
double nonlinearity_index(const CompiledScenario& scenario, int n_samples, std::uint64_t seed);

}  // namespace risim
