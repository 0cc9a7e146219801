#include "risim/physics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "risim/bessel.hpp"
#include "risim/errors.hpp"
#include "risim/rng.hpp"

namespace risim {

Complex lorentzian_polarizability(double f, const DipoleProperties& props) {
    if (!(f > 0.0)) throw std::invalid_argument("polarizability: f must be positive");
    if (!props.valid()) throw std::invalid_argument("polarizability: invalid properties");
    const double f0sq = props.f0 * props.f0;
    const Complex denom(f0sq - f * f, props.chi * f);
    return props.gamma * f0sq / denom;
}

Complex greens_2d(double k, Vec2 r1, Vec2 r2) {
    if (!(k > 0.0)) throw std::invalid_argument("greens_2d: k must be positive");
    const double d = distance(r1, r2);
    if (d <= 0.0) throw std::invalid_argument("greens_2d: coincident points");
    return Complex(0.0, 0.25) * hankel0_second_kind(k * d);
}

Eigen::MatrixXcd assemble_interaction_matrix(const std::vector<Dipole>& dipoles, double f) {
    const int n = static_cast<int>(dipoles.size());
    if (n == 0) throw ValidationError("assemble_interaction_matrix: empty dipole list");
    const double k = wavenumber(f);

    Eigen::MatrixXcd w(n, n);
    for (int i = 0; i < n; ++i) {
        const Complex alpha = lorentzian_polarizability(f, dipoles[i].props);
        if (alpha == Complex(0.0, 0.0)) {
            std::ostringstream msg;
            msg << "assemble_interaction_matrix: dipole " << i << " has zero polarizability";
            throw NumericalError(msg.str());
        }
        w(i, i) = 1.0 / alpha;
        for (int j = i + 1; j < n; ++j) {
            const double d = distance(dipoles[i].pos, dipoles[j].pos);
            if (d <= 0.0) {
                std::ostringstream msg;
                msg << "assemble_interaction_matrix: dipoles " << i << " and " << j
                    << " coincide";
                throw ValidationError(msg.str());
            }
            const Complex g = Complex(0.0, 0.25) * hankel0_second_kind(k * d);
            w(i, j) = -g;
            w(j, i) = -g;
        }
    }
    return w;
}

double lu_pivot_ratio(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
    const auto diag = lu.matrixLU().diagonal();
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        const double m = std::abs(diag(i));
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

namespace {

struct ActiveSystem {
    std::vector<int> rows;        // dipole index per matrix row
    std::vector<int> row_of;      // dipole index -> matrix row, -1 if inert
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
};

ActiveSystem factorize_active(const std::vector<Dipole>& dipoles, double f,
                              const char* context) {
    ActiveSystem sys;
    sys.row_of.assign(dipoles.size(), -1);
    std::vector<Dipole> active;
    for (std::size_t i = 0; i < dipoles.size(); ++i) {
        if (dipoles[i].props.gamma > 0.0) {
            sys.row_of[i] = static_cast<int>(active.size());
            sys.rows.push_back(static_cast<int>(i));
            active.push_back(dipoles[i]);
        }
    }
    if (active.empty())
        throw ValidationError(std::string(context) + ": no scattering dipoles");

    const Eigen::MatrixXcd w = assemble_interaction_matrix(active, f);
    sys.lu.compute(w);
    const double cond = lu_pivot_ratio(sys.lu);
    if (!(cond < kConditionLimit)) {
        std::ostringstream msg;
        msg << context << ": interaction matrix numerically singular (condition estimate "
            << cond << " over " << active.size() << " dipoles)";
        throw NumericalError(msg.str());
    }
    return sys;
}

}  // namespace

double condition_estimate(const Eigen::MatrixXcd& w) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(w);
    return lu_pivot_ratio(lu);
}

ChannelMatrix channel_matrix(const std::vector<Dipole>& dipoles,
                             const std::vector<int>& receivers,
                             const std::vector<int>& transmitters, double f) {
    const ActiveSystem sys = factorize_active(dipoles, f, "channel_matrix");
    const int n = static_cast<int>(sys.rows.size());

    for (const int r : receivers)
        if (r < 0 || r >= static_cast<int>(dipoles.size()) || sys.row_of[r] < 0)
            throw ValidationError("channel_matrix: receiver dipole inert or out of range");
    for (const int t : transmitters)
        if (t < 0 || t >= static_cast<int>(dipoles.size()) || sys.row_of[t] < 0)
            throw ValidationError("channel_matrix: transmitter dipole inert or out of range");

    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, static_cast<int>(transmitters.size()));
    for (std::size_t c = 0; c < transmitters.size(); ++c)
        rhs(sys.row_of[transmitters[c]], static_cast<int>(c)) = 1.0;

    const Eigen::MatrixXcd cols = sys.lu.solve(rhs);

    ChannelMatrix out;
    out.receiver_dipoles = receivers;
    out.transmitter_dipoles = transmitters;
    out.h.resize(static_cast<int>(receivers.size()), static_cast<int>(transmitters.size()));
    for (std::size_t r = 0; r < receivers.size(); ++r)
        out.h.row(static_cast<int>(r)) = cols.row(sys.row_of[receivers[r]]);
    return out;
}

ChannelMatrix channel_matrix(const CompiledScenario& scenario) {
    return channel_matrix(scenario.dipoles, scenario.receivers(), {scenario.sets.tx},
                          scenario.frequency);
}

ChannelMatrix channel_matrix(const ScenarioSpec& spec, const RISConfig& config,
                             const PerturberState& state) {
    return channel_matrix(apply_ris_config(compile_scenario(spec, state), config));
}

ChannelSample to_sample(const ChannelMatrix& cm) {
    if (cm.h.cols() != 1 || cm.h.rows() < 1)
        throw std::invalid_argument("to_sample: expected a single-TX channel");
    ChannelSample s;
    s.ue = cm.h(0, 0);
    s.aux = cm.h.col(0).tail(cm.h.rows() - 1);
    return s;
}

// ---------------------------------------------------------------------------
// ChannelWorkspace

ChannelWorkspace::ChannelWorkspace(CompiledScenario scenario) : scenario_(std::move(scenario)) {
    const double f = scenario_.frequency;
    const bool on_active = scenario_.ris_on.gamma > 0.0;
    const bool off_active = scenario_.ris_off.gamma > 0.0;
    if (on_active != off_active)
        throw ValidationError(
            "ChannelWorkspace: RIS on/off properties must be both active or both inert");
    ris_active_ = on_active;
    if (ris_active_) {
        inv_alpha_on_ = 1.0 / lorentzian_polarizability(f, scenario_.ris_on);
        inv_alpha_off_ = 1.0 / lorentzian_polarizability(f, scenario_.ris_off);
    }

    const ActiveSystem sys = factorize_active(scenario_.dipoles, f, "ChannelWorkspace");

    const std::vector<int> rx = scenario_.receivers();
    for (const int r : rx)
        if (sys.row_of[r] < 0)
            throw ValidationError("ChannelWorkspace: receiver dipole is inert");
    if (sys.row_of[scenario_.sets.tx] < 0)
        throw ValidationError("ChannelWorkspace: TX dipole is inert");

    panel_rows_ = rx;
    n_rx_ = static_cast<int>(rx.size());
    panel_cols_.clear();
    ris_slot_.assign(scenario_.sets.ris.size(), -1);
    if (ris_active_) {
        for (std::size_t e = 0; e < scenario_.sets.ris.size(); ++e) {
            const int d = scenario_.sets.ris[e];
            if (sys.row_of[d] < 0) continue;
            ris_slot_[e] = static_cast<int>(panel_cols_.size());
            panel_cols_.push_back(d);
            panel_rows_.push_back(d);
        }
    }
    panel_cols_.push_back(scenario_.sets.tx);

    const int n = static_cast<int>(sys.rows.size());
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, static_cast<int>(panel_cols_.size()));
    for (std::size_t c = 0; c < panel_cols_.size(); ++c)
        rhs(sys.row_of[panel_cols_[c]], static_cast<int>(c)) = 1.0;
    const Eigen::MatrixXcd cols = sys.lu.solve(rhs);

    panel_.resize(static_cast<int>(panel_rows_.size()), static_cast<int>(panel_cols_.size()));
    for (std::size_t r = 0; r < panel_rows_.size(); ++r)
        panel_.row(static_cast<int>(r)) = cols.row(sys.row_of[panel_rows_[r]]);
}

ChannelSample ChannelWorkspace::base_channel() const {
    ChannelSample s;
    const int tx_col = static_cast<int>(panel_cols_.size()) - 1;
    s.ue = panel_(0, tx_col);
    s.aux = panel_.col(tx_col).segment(1, n_rx_ - 1);
    return s;
}

ChannelSample ChannelWorkspace::evaluate_full(const RISConfig& config) const {
    return to_sample(channel_matrix(apply_ris_config(scenario_, config)));
}

ChannelSample ChannelWorkspace::evaluate(const RISConfig& config) const {
    if (!ris_active_ || config == scenario_.config) return base_channel();

    std::vector<int> slots;
    std::vector<Complex> inv_delta;
    slots.reserve(32);
    inv_delta.reserve(32);
    for (int m = 0; m < scenario_.num_pixels(); ++m) {
        if (config.get(m) == scenario_.config.get(m)) continue;
        const Complex delta = (config.get(m) ? inv_alpha_on_ : inv_alpha_off_) -
                              (scenario_.config.get(m) ? inv_alpha_on_ : inv_alpha_off_);
        if (delta == Complex(0.0, 0.0)) continue;
        for (int e = 4 * m; e < 4 * (m + 1); ++e) {
            if (ris_slot_[e] < 0) continue;
            slots.push_back(ris_slot_[e]);
            inv_delta.push_back(1.0 / delta);
        }
    }
    if (slots.empty()) return base_channel();

    const int k = static_cast<int>(slots.size());
    const int tx_col = static_cast<int>(panel_cols_.size()) - 1;

    Eigen::MatrixXcd cap(k, k);
    Eigen::VectorXcd rhs(k);
    for (int a = 0; a < k; ++a) {
        const int row = n_rx_ + slots[a];
        for (int b = 0; b < k; ++b) cap(a, b) = panel_(row, slots[b]);
        cap(a, a) += inv_delta[a];
        rhs(a) = panel_(row, tx_col);
    }

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(cap);
    if (!(lu_pivot_ratio(lu) < kConditionLimit)) return evaluate_full(config);
    const Eigen::VectorXcd z = lu.solve(rhs);

    ChannelSample s;
    s.aux.resize(n_rx_ - 1);
    for (int r = 0; r < n_rx_; ++r) {
        Complex corr = 0.0;
        for (int a = 0; a < k; ++a) corr += panel_(r, slots[a]) * z(a);
        const Complex h = panel_(r, tx_col) - corr;
        if (r == 0)
            s.ue = h;
        else
            s.aux(r - 1) = h;
    }
    return s;
}

ChannelMatrix ChannelWorkspace::woodbury_diag_update(
    const std::vector<int>& dipole_indices, const std::vector<Complex>& new_diagonals) const {
    if (dipole_indices.size() != new_diagonals.size())
        throw std::invalid_argument("woodbury_diag_update: index/value size mismatch");

    std::vector<int> slots;
    std::vector<Complex> inv_delta;
    for (std::size_t i = 0; i < dipole_indices.size(); ++i) {
        const int d = dipole_indices[i];
        int slot = -1;
        int elem = -1;
        for (std::size_t e = 0; e < scenario_.sets.ris.size(); ++e)
            if (scenario_.sets.ris[e] == d) {
                elem = static_cast<int>(e);
                break;
            }
        if (elem >= 0) slot = ris_slot_[elem];
        if (slot < 0)
            throw std::invalid_argument(
                "woodbury_diag_update: index not covered by the factorized panel");
        const int pixel = elem / 4;
        const Complex base_diag =
            scenario_.config.get(pixel) ? inv_alpha_on_ : inv_alpha_off_;
        const Complex delta = new_diagonals[i] - base_diag;
        if (delta == Complex(0.0, 0.0)) continue;
        slots.push_back(slot);
        inv_delta.push_back(1.0 / delta);
    }

    const int tx_col = static_cast<int>(panel_cols_.size()) - 1;
    ChannelMatrix out;
    out.receiver_dipoles = scenario_.receivers();
    out.transmitter_dipoles = {scenario_.sets.tx};
    out.h.resize(n_rx_, 1);

    if (slots.empty()) {
        for (int r = 0; r < n_rx_; ++r) out.h(r, 0) = panel_(r, tx_col);
        return out;
    }

    const int k = static_cast<int>(slots.size());
    Eigen::MatrixXcd cap(k, k);
    Eigen::VectorXcd rhs(k);
    for (int a = 0; a < k; ++a) {
        const int row = n_rx_ + slots[a];
        for (int b = 0; b < k; ++b) cap(a, b) = panel_(row, slots[b]);
        cap(a, a) += inv_delta[a];
        rhs(a) = panel_(row, tx_col);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(cap);
    if (!(lu_pivot_ratio(lu) < kConditionLimit))
        throw NumericalError("woodbury_diag_update: update system numerically singular");
    const Eigen::VectorXcd z = lu.solve(rhs);

    for (int r = 0; r < n_rx_; ++r) {
        Complex corr = 0.0;
        for (int a = 0; a < k; ++a) corr += panel_(r, slots[a]) * z(a);
        out.h(r, 0) = panel_(r, tx_col) - corr;
    }
    return out;
}

Complex ChannelWorkspace::base_inverse_entry(int row_dipole, int col_dipole) const {
    const auto find = [](const std::vector<int>& v, int x) {
        const auto it = std::find(v.begin(), v.end(), x);
        return it == v.end() ? -1 : static_cast<int>(it - v.begin());
    };
    const int r = find(panel_rows_, row_dipole);
    const int c = find(panel_cols_, col_dipole);
    if (r < 0 || c < 0)
        throw std::invalid_argument("base_inverse_entry: entry outside the cached panel");
    return panel_(r, c);
}

// ---------------------------------------------------------------------------
// Nonlinearity of the bit parametrization

double nonlinearity_index(const CompiledScenario& scenario, int n_samples, std::uint64_t seed) {
    const int n_coef = RISConfig::kNumPixels + 1;
    if (n_samples < 10 * n_coef)
        throw std::invalid_argument("nonlinearity_index: need at least 10 samples per fit "
                                    "coefficient");

    const ChannelWorkspace ws(scenario);
    Rng rng = make_rng(seed);

    Eigen::MatrixXd design(n_samples, n_coef);
    Eigen::MatrixXd target(n_samples, 2);
    for (int s = 0; s < n_samples; ++s) {
        const RISConfig config{static_cast<std::uint32_t>(rng() & RISConfig::kMask)};
        design(s, 0) = 1.0;
        for (int m = 0; m < RISConfig::kNumPixels; ++m)
            design(s, 1 + m) = config.get(m) ? 1.0 : 0.0;
        const Complex h = ws.evaluate(config).ue;
        target(s, 0) = h.real();
        target(s, 1) = h.imag();
    }

    const Eigen::MatrixXd beta = design.colPivHouseholderQr().solve(target);
    const double total = target.norm();
    if (total == 0.0) return 0.0;
    const double residual = (target - design * beta).norm();
    return residual / total;
}

}  // namespace risim
