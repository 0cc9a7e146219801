#include "risim/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "risim/errors.hpp"
#include "risim/rng.hpp"

namespace risim {

namespace {

using nlohmann::json;

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(cols[i]);
    return out;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

void softmax_columns(Eigen::MatrixXd& z) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        Eigen::VectorXd col = z.col(c);
        double m = col.maxCoeff();
        col = (col.array() - m).exp();
        z.col(c) = col / col.sum();
    }
}

void check_model_shapes(const MlpModel& model) {
    if (model.weights.empty() || model.weights.size() != model.biases.size())
        throw std::invalid_argument("mlp: weights/biases layer counts do not match");
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        if (model.weights[l].rows() != model.biases[l].size())
            throw std::invalid_argument("mlp: bias length does not match layer rows");
        if (l + 1 < model.weights.size() &&
            model.weights[l + 1].cols() != model.weights[l].rows())
            throw std::invalid_argument("mlp: consecutive layer shapes do not chain");
    }
    if (model.feat_mean.size() != model.weights.front().cols() ||
        model.feat_scale.size() != model.weights.front().cols())
        throw std::invalid_argument("mlp: standardization length does not match input width");
}

}  // namespace

int MlpModel::input_dim() const {
    return weights.empty() ? 0 : static_cast<int>(weights.front().cols());
}

int MlpModel::output_dim() const {
    return weights.empty() ? 0 : static_cast<int>(weights.back().rows());
}

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& x) const {
    check_model_shapes(*this);
    if (x.rows() != input_dim())
        throw std::invalid_argument("mlp forward: feature dimension mismatch");
    Eigen::MatrixXd a =
        (x.colwise() - feat_mean).array().colwise() / feat_scale.array();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Eigen::MatrixXd z = (weights[l] * a).colwise() + biases[l];
        if (l + 1 < weights.size()) {
            a = relu(z);
        } else {
            a = std::move(z);
        }
    }
    if (head == Head::Softmax) softmax_columns(a);
    return a;
}

MlpModel init_mlp(int input, const std::vector<int>& hidden, int output, MlpModel::Head head,
                  std::uint64_t seed) {
    if (input < 1 || output < 1) throw std::invalid_argument("init_mlp: bad layer widths");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("init_mlp: bad hidden width");

    std::vector<int> widths;
    widths.push_back(input);
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(output);

    MlpModel model;
    model.head = head;
    Rng rng = make_rng(seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        int fan_in = widths[l], fan_out = widths[l + 1];
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = uniform_real(rng, -limit, limit);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    model.feat_mean = Eigen::VectorXd::Zero(input);
    model.feat_scale = Eigen::VectorXd::Ones(input);
    return model;
}

double mlp_loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& y, MlpGradients* grads) {
    check_model_shapes(model);
    if (x.rows() != model.input_dim())
        throw std::invalid_argument("mlp loss: feature dimension mismatch");
    if (y.rows() != model.output_dim() || y.cols() != x.cols())
        throw std::invalid_argument("mlp loss: target shape mismatch");
    if (x.cols() == 0) throw std::invalid_argument("mlp loss: empty batch");

    const std::size_t layers = model.weights.size();
    const double batch = static_cast<double>(x.cols());

    std::vector<Eigen::MatrixXd> activations(layers + 1);
    std::vector<Eigen::MatrixXd> pre(layers);
    activations[0] =
        (x.colwise() - model.feat_mean).array().colwise() / model.feat_scale.array();
    for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = (model.weights[l] * activations[l]).colwise() + model.biases[l];
        activations[l + 1] = (l + 1 < layers) ? relu(pre[l]) : pre[l];
    }

    Eigen::MatrixXd out = activations[layers];
    double loss = 0.0;
    Eigen::MatrixXd dz;  // gradient of the mean loss wrt the last pre-activation
    if (model.head == MlpModel::Head::Softmax) {
        Eigen::MatrixXd probs = out;
        softmax_columns(probs);
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            for (Eigen::Index r = 0; r < probs.rows(); ++r) {
                if (y(r, c) > 0.0) loss -= y(r, c) * std::log(std::max(probs(r, c), 1e-300));
            }
        }
        loss /= batch;
        dz = (probs - y) / batch;
    } else {
        Eigen::MatrixXd diff = out - y;
        loss = 0.5 * diff.squaredNorm() / batch;
        dz = diff / batch;
    }

    if (grads != nullptr) {
        grads->dw.assign(layers, Eigen::MatrixXd());
        grads->db.assign(layers, Eigen::VectorXd());
        for (std::size_t l = layers; l-- > 0;) {
            grads->dw[l] = dz * activations[l].transpose();
            grads->db[l] = dz.rowwise().sum();
            if (l > 0) {
                Eigen::MatrixXd da = model.weights[l].transpose() * dz;
                dz = da.array() * (pre[l - 1].array() > 0.0).cast<double>();
            }
        }
    }
    return loss;
}

TrainHistory train_mlp(MlpModel& model, const Eigen::MatrixXd& x_train,
                       const Eigen::MatrixXd& y_train, const Eigen::MatrixXd& x_val,
                       const Eigen::MatrixXd& y_val, const TrainSpec& spec) {
    if (x_train.cols() < 1) throw std::invalid_argument("train_mlp: empty training set");
    if (spec.batch_size < 1 || spec.epochs < 1)
        throw std::invalid_argument("train_mlp: batch size and epochs must be positive");

    // Standardize to the training distribution; a near-constant feature keeps
    // scale 1 instead of exploding.
    model.feat_mean = x_train.rowwise().mean();
    Eigen::MatrixXd centered = x_train.colwise() - model.feat_mean;
    Eigen::VectorXd var = centered.array().square().rowwise().mean();
    model.feat_scale = var.array().sqrt().max(1e-8);

    const int n = static_cast<int>(x_train.cols());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = make_rng(spec.seed);

    MlpGradients grads;
    std::vector<Eigen::MatrixXd> vel_w;
    std::vector<Eigen::VectorXd> vel_b;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        vel_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        vel_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }

    TrainHistory history;
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        double epoch_loss = 0.0;
        for (int begin = 0; begin < n; begin += spec.batch_size) {
            int size = std::min(spec.batch_size, n - begin);
            std::vector<int> cols(perm.begin() + begin, perm.begin() + begin + size);
            Eigen::MatrixXd xb = select_columns(x_train, cols);
            Eigen::MatrixXd yb = select_columns(y_train, cols);
            double loss = mlp_loss_and_gradients(model, xb, yb, &grads);
            epoch_loss += loss * size;
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                vel_w[l] = spec.momentum * vel_w[l] - spec.learning_rate * grads.dw[l];
                vel_b[l] = spec.momentum * vel_b[l] - spec.learning_rate * grads.db[l];
                model.weights[l] += vel_w[l];
                model.biases[l] += vel_b[l];
            }
        }
        epoch_loss /= static_cast<double>(n);
        history.train_loss.push_back(epoch_loss);

        double vloss = std::numeric_limits<double>::quiet_NaN();
        if (x_val.cols() > 0) vloss = mlp_loss_and_gradients(model, x_val, y_val, nullptr);
        history.val_loss.push_back(vloss);

        if (!std::isfinite(epoch_loss) || (x_val.cols() > 0 && !std::isfinite(vloss))) {
            std::ostringstream msg;
            msg << "training diverged at epoch " << epoch << " (train loss " << epoch_loss;
            if (x_val.cols() > 0) msg << ", val loss " << vloss;
            msg << "); history has " << history.train_loss.size() << " epochs";
            throw NumericalError(msg.str());
        }
    }
    return history;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError("model json: bad matrix");
    Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ValidationError("model json: ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    if (!j.is_array()) throw ValidationError("model json: bad vector");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

json mlp_to_json(const MlpModel& model) {
    json j;
    j["head"] = model.head == MlpModel::Head::Softmax ? "softmax" : "scalar";
    j["weights"] = json::array();
    j["biases"] = json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        j["weights"].push_back(matrix_to_json(model.weights[l]));
        j["biases"].push_back(vector_to_json(model.biases[l]));
    }
    j["feat_mean"] = vector_to_json(model.feat_mean);
    j["feat_scale"] = vector_to_json(model.feat_scale);
    return j;
}

MlpModel mlp_from_json(const json& j) {
    MlpModel model;
    std::string head = j.at("head").get<std::string>();
    if (head == "softmax") {
        model.head = MlpModel::Head::Softmax;
    } else if (head == "scalar") {
        model.head = MlpModel::Head::Scalar;
    } else {
        throw ValidationError("model json: unknown head '" + head + "'");
    }
    const json& ws = j.at("weights");
    const json& bs = j.at("biases");
    if (ws.size() != bs.size() || ws.empty())
        throw ValidationError("model json: weights/biases layer counts do not match");
    for (std::size_t l = 0; l < ws.size(); ++l) {
        model.weights.push_back(matrix_from_json(ws.at(l)));
        model.biases.push_back(vector_from_json(bs.at(l)));
    }
    model.feat_mean = vector_from_json(j.at("feat_mean"));
    model.feat_scale = vector_from_json(j.at("feat_scale"));
    check_model_shapes(model);
    return model;
}

}  // namespace

std::string mlp_to_json_text(const MlpModel& model) { return mlp_to_json(model).dump(); }

MlpModel mlp_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model json: parse error: ") + e.what());
    }
    try {
        return mlp_from_json(j);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model json: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Fingerprints and datasets

Eigen::VectorXd fingerprint_from_aux(const Eigen::VectorXcd& aux) {
    Eigen::VectorXd f(2 * aux.size());
    for (Eigen::Index k = 0; k < aux.size(); ++k) {
        f(2 * k) = aux(k).real();
        f(2 * k + 1) = aux(k).imag();
    }
    return f;
}

Eigen::VectorXd generate_fingerprint(const ChannelWorkspace& state,
                                     const std::vector<RISConfig>& series, double sigma2,
                                     Rng& rng) {
    if (series.empty()) throw std::invalid_argument("fingerprint: empty config series");
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("fingerprint: negative noise variance");
    const double s = std::sqrt(0.5 * sigma2);
    Eigen::VectorXd f;
    for (std::size_t i = 0; i < series.size(); ++i) {
        ChannelSample sample = state.evaluate(series[i]);
        Eigen::VectorXd part = fingerprint_from_aux(sample.aux);
        for (Eigen::Index k = 0; k < part.size(); ++k) part(k) += s * standard_normal(rng);
        Eigen::Index base = f.size();
        f.conservativeResize(base + part.size());
        f.segment(base, part.size()) = part;
    }
    return f;
}

namespace {

struct PerturberSample {
    PerturberState state;
    std::uint64_t noise_seed;
};

std::vector<PerturberSample> draw_perturber_samples(int n, std::uint64_t seed) {
    std::vector<PerturberSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::uint64_t s = derive_seed(seed, 0x5a3e, static_cast<std::uint64_t>(i));
        Rng rng = make_rng(s);
        PerturberSample ps;
        ps.state.p = uniform_real(rng, 0.0, 1.0);
        ps.state.shape = static_cast<Shape>(rng() % kNumShapes);
        ps.noise_seed = derive_seed(s, 1);
        out.push_back(ps);
    }
    return out;
}

double snr_db_to_sigma2(double snr_db, double p_ref) {
    return p_ref * std::pow(10.0, -snr_db / 10.0);
}

// Position-level split: all noise draws of one perturber sample land in the
// same fold, so validation measures generalization to unseen states.
void split_by_position(SensingDataset& ds, int n_positions, int draws, double val_fraction,
                       std::uint64_t seed) {
    std::vector<int> order(static_cast<std::size_t>(n_positions));
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(derive_seed(seed, 0x5917));
    std::shuffle(order.begin(), order.end(), rng);
    int n_val = std::clamp(static_cast<int>(std::lround(val_fraction * n_positions)), 1,
                           n_positions - 1);
    std::vector<bool> is_val(static_cast<std::size_t>(n_positions), false);
    for (int i = 0; i < n_val; ++i) is_val[static_cast<std::size_t>(order[i])] = true;
    for (int p = 0; p < n_positions; ++p) {
        for (int d = 0; d < draws; ++d) {
            int col = p * draws + d;
            (is_val[static_cast<std::size_t>(p)] ? ds.val_cols : ds.train_cols).push_back(col);
        }
    }
}

void check_dataset_spec(const DatasetSpec& ds) {
    if (ds.n_positions < 2) throw std::invalid_argument("dataset: need >= 2 perturber samples");
    if (ds.noise_draws < 1) throw std::invalid_argument("dataset: need >= 1 noise draw");
    if (!(ds.snr_max_db >= ds.snr_min_db))
        throw std::invalid_argument("dataset: empty SNR range");
    if (!(ds.val_fraction > 0.0 && ds.val_fraction < 1.0))
        throw std::invalid_argument("dataset: val fraction must be in (0, 1)");
}

}  // namespace

SensingDataset build_mode_a_dataset(const ScenarioSpec& spec, const std::vector<RISConfig>& series,
                                    const DatasetSpec& ds, double p_ref, std::uint64_t seed) {
    check_dataset_spec(ds);
    if (series.empty()) throw std::invalid_argument("mode A dataset: empty config series");
    if (!(p_ref > 0.0)) throw std::invalid_argument("mode A dataset: reference power must be > 0");

    auto samples = draw_perturber_samples(ds.n_positions, seed);
    const int dim = static_cast<int>(series.size()) * 16;
    const int n = ds.n_positions * ds.noise_draws;

    SensingDataset out;
    out.x.resize(dim, n);
    out.pos.resize(n);
    out.shape.resize(static_cast<std::size_t>(n));

    for (int i = 0; i < ds.n_positions; ++i) {
        ChannelWorkspace ws(compile_scenario(spec, samples[i].state));
        Rng rng = make_rng(samples[i].noise_seed);
        for (int d = 0; d < ds.noise_draws; ++d) {
            double snr = uniform_real(rng, ds.snr_min_db, ds.snr_max_db);
            double sigma2 = snr_db_to_sigma2(snr, p_ref);
            int col = i * ds.noise_draws + d;
            out.x.col(col) = generate_fingerprint(ws, series, sigma2, rng);
            out.pos(col) = samples[i].state.p;
            out.shape[static_cast<std::size_t>(col)] = static_cast<int>(samples[i].state.shape);
        }
    }
    split_by_position(out, ds.n_positions, ds.noise_draws, ds.val_fraction, seed);
    return out;
}

std::map<std::uint32_t, SensingDataset> build_mode_b_datasets(
    const ScenarioSpec& spec, const std::vector<RISConfig>& configs, const DatasetSpec& ds,
    double p_ref, std::uint64_t seed) {
    check_dataset_spec(ds);
    if (configs.empty()) throw std::invalid_argument("mode B dataset: no configs");
    if (!(p_ref > 0.0)) throw std::invalid_argument("mode B dataset: reference power must be > 0");

    std::vector<RISConfig> distinct;
    for (const RISConfig& c : configs) {
        bool seen = false;
        for (const RISConfig& d : distinct) seen = seen || d.bits == c.bits;
        if (!seen) distinct.push_back(c);
    }

    auto samples = draw_perturber_samples(ds.n_positions, seed);
    const int n = ds.n_positions * ds.noise_draws;

    std::map<std::uint32_t, SensingDataset> out;
    for (const RISConfig& c : distinct) {
        SensingDataset d;
        d.x.resize(16, n);
        d.pos.resize(n);
        d.shape.resize(static_cast<std::size_t>(n));
        out.emplace(c.bits, std::move(d));
    }

    // One workspace per perturber sample serves every config; the noiseless
    // aux vector is computed once per (sample, config) and only the noise is
    // redrawn.
    for (int i = 0; i < ds.n_positions; ++i) {
        ChannelWorkspace ws(compile_scenario(spec, samples[i].state));
        Rng rng = make_rng(samples[i].noise_seed);
        for (const RISConfig& c : distinct) {
            Eigen::VectorXd clean = fingerprint_from_aux(ws.evaluate(c).aux);
            SensingDataset& d = out.at(c.bits);
            for (int k = 0; k < ds.noise_draws; ++k) {
                double snr = uniform_real(rng, ds.snr_min_db, ds.snr_max_db);
                double s = std::sqrt(0.5 * snr_db_to_sigma2(snr, p_ref));
                int col = i * ds.noise_draws + k;
                Eigen::VectorXd noisy = clean;
                for (Eigen::Index e = 0; e < noisy.size(); ++e)
                    noisy(e) += s * standard_normal(rng);
                d.x.col(col) = noisy;
                d.pos(col) = samples[i].state.p;
                d.shape[static_cast<std::size_t>(col)] = static_cast<int>(samples[i].state.shape);
            }
        }
    }
    for (auto& [bits, d] : out)
        split_by_position(d, ds.n_positions, ds.noise_draws, ds.val_fraction, seed);
    return out;
}

// ---------------------------------------------------------------------------
// Prediction and bank construction

Eigen::Vector3d shape_probabilities(const ModelPair& models, const Eigen::VectorXd& fingerprint) {
    if (models.shape_model.head != MlpModel::Head::Softmax)
        throw std::logic_error("shape model must have a softmax head");
    Eigen::MatrixXd probs = models.shape_model.forward(fingerprint);
    if (probs.rows() != kNumShapes) throw std::logic_error("shape model must have 3 outputs");
    return probs.col(0);
}

Shape predict_shape(const ModelPair& models, const Eigen::VectorXd& fingerprint) {
    Eigen::Vector3d probs = shape_probabilities(models, fingerprint);
    Eigen::Index best = 0;
    probs.maxCoeff(&best);
    return static_cast<Shape>(best);
}

double predict_position(const ModelPair& models, const Eigen::VectorXd& fingerprint) {
    Eigen::MatrixXd y = models.position_model.forward(fingerprint);
    return std::clamp(y(0, 0), 0.0, 1.0);
}

const ModelPair& mode_b_models(const InferenceBank& bank, const RISConfig& config) {
    auto it = bank.mode_b.find(config.bits);
    if (it == bank.mode_b.end())
        throw ValidationError("no per-config sensing models for config bits " +
                              std::to_string(config.bits));
    return it->second;
}

namespace {

struct TrainedModel {
    MlpModel model;
    ModelReport report;
};

TrainedModel train_on_dataset(const SensingDataset& ds, MlpModel::Head head,
                              const TrainSpec& spec, std::uint64_t seed,
                              const std::string& name) {
    Eigen::MatrixXd y(head == MlpModel::Head::Softmax ? kNumShapes : 1, ds.x.cols());
    if (head == MlpModel::Head::Softmax) {
        y.setZero();
        for (Eigen::Index c = 0; c < ds.x.cols(); ++c)
            y(ds.shape[static_cast<std::size_t>(c)], c) = 1.0;
    } else {
        for (Eigen::Index c = 0; c < ds.x.cols(); ++c) y(0, c) = ds.pos(c);
    }

    Eigen::MatrixXd xt = select_columns(ds.x, ds.train_cols);
    Eigen::MatrixXd yt = select_columns(y, ds.train_cols);
    Eigen::MatrixXd xv = select_columns(ds.x, ds.val_cols);
    Eigen::MatrixXd yv = select_columns(y, ds.val_cols);

    TrainedModel tm;
    tm.model = init_mlp(static_cast<int>(ds.x.rows()), spec.hidden,
                        head == MlpModel::Head::Softmax ? kNumShapes : 1, head,
                        derive_seed(seed, 0x1417));
    TrainSpec local = spec;
    local.seed = derive_seed(seed, 0x7a41);
    TrainHistory history = train_mlp(tm.model, xt, yt, xv, yv, local);

    tm.report.name = name;
    tm.report.final_train_loss = history.train_loss.back();
    tm.report.final_val_loss = history.val_loss.back();
    if (head == MlpModel::Head::Softmax) {
        int hits = 0;
        for (std::size_t i = 0; i < ds.val_cols.size(); ++i) {
            Eigen::MatrixXd probs = tm.model.forward(xv.col(static_cast<Eigen::Index>(i)));
            Eigen::Index best = 0;
            probs.col(0).maxCoeff(&best);
            hits += (static_cast<int>(best) ==
                     ds.shape[static_cast<std::size_t>(ds.val_cols[i])]);
        }
        tm.report.val_shape_accuracy =
            static_cast<double>(hits) / static_cast<double>(ds.val_cols.size());
    } else {
        double mae = 0.0;
        for (std::size_t i = 0; i < ds.val_cols.size(); ++i) {
            Eigen::MatrixXd out = tm.model.forward(xv.col(static_cast<Eigen::Index>(i)));
            mae += std::abs(std::clamp(out(0, 0), 0.0, 1.0) - yv(0, static_cast<Eigen::Index>(i)));
        }
        tm.report.val_position_mae = mae / static_cast<double>(ds.val_cols.size());
    }
    return tm;
}

}  // namespace

InferenceBank build_inference_bank(const ScenarioSpec& spec, const CodeBook& book, double p_ref,
                                   std::uint64_t master_seed, const BankBuildOptions& options,
                                   BankTrainReport* report) {
    if (options.series_length < 1)
        throw std::invalid_argument("bank: probe series must have >= 1 config");
    if (book.entries.empty()) throw std::invalid_argument("bank: empty code book");

    InferenceBank bank;
    bank.p_ref = p_ref;
    bank.master_seed = master_seed;
    bank.scenario_hash = scenario_hash(spec);
    bank.mode_a_series =
        random_configs(options.series_length, derive_seed(master_seed, 0xa5e7));

    BankTrainReport local_report;

    SensingDataset mode_a = build_mode_a_dataset(spec, bank.mode_a_series, options.mode_a_data,
                                                 p_ref, derive_seed(master_seed, 0xda7a, 0));
    TrainedModel a_shape =
        train_on_dataset(mode_a, MlpModel::Head::Softmax, options.mode_a_shape_train,
                         derive_seed(master_seed, 0x0a, 0), "mode_a_shape");
    TrainedModel a_pos =
        train_on_dataset(mode_a, MlpModel::Head::Scalar, options.mode_a_position_train,
                         derive_seed(master_seed, 0x0a, 1), "mode_a_position");
    bank.mode_a = {std::move(a_shape.model), std::move(a_pos.model)};
    local_report.models.push_back(a_shape.report);
    local_report.models.push_back(a_pos.report);

    std::vector<RISConfig> configs;
    for (const CodeBookEntry& e : book.entries) {
        configs.push_back(e.pair.c0);
        configs.push_back(e.pair.c1);
    }
    auto mode_b_data = build_mode_b_datasets(spec, configs, options.mode_b_data, p_ref,
                                             derive_seed(master_seed, 0xda7a, 1));
    for (const auto& [bits, ds] : mode_b_data) {
        TrainedModel b_shape =
            train_on_dataset(ds, MlpModel::Head::Softmax, options.mode_b_shape_train,
                             derive_seed(master_seed, 0x0b, bits, 0),
                             "mode_b_shape_" + std::to_string(bits));
        TrainedModel b_pos =
            train_on_dataset(ds, MlpModel::Head::Scalar, options.mode_b_position_train,
                             derive_seed(master_seed, 0x0b, bits, 1),
                             "mode_b_position_" + std::to_string(bits));
        bank.mode_b.emplace(bits, ModelPair{std::move(b_shape.model), std::move(b_pos.model)});
        local_report.models.push_back(b_shape.report);
        local_report.models.push_back(b_pos.report);
    }

    if (report != nullptr) *report = std::move(local_report);
    return bank;
}

std::string bank_to_json_text(const InferenceBank& bank) {
    json j;
    j["p_ref"] = bank.p_ref;
    j["scenario_hash"] = bank.scenario_hash;
    j["master_seed"] = bank.master_seed;
    json series = json::array();
    for (const RISConfig& c : bank.mode_a_series) series.push_back(c.bits);
    j["mode_a_series"] = std::move(series);
    j["mode_a"] = {{"shape_model", mlp_to_json(bank.mode_a.shape_model)},
                   {"position_model", mlp_to_json(bank.mode_a.position_model)}};
    json mode_b = json::array();
    for (const auto& [bits, pair] : bank.mode_b) {
        mode_b.push_back({{"config", bits},
                          {"shape_model", mlp_to_json(pair.shape_model)},
                          {"position_model", mlp_to_json(pair.position_model)}});
    }
    j["mode_b"] = std::move(mode_b);
    return j.dump();
}

InferenceBank bank_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bank json: parse error: ") + e.what());
    }
    try {
        InferenceBank bank;
        bank.p_ref = j.at("p_ref").get<double>();
        bank.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
        bank.master_seed = j.at("master_seed").get<std::uint64_t>();
        for (const json& bits : j.at("mode_a_series")) {
            RISConfig c;
            c.bits = bits.get<std::uint32_t>() & RISConfig::kMask;
            bank.mode_a_series.push_back(c);
        }
        bank.mode_a.shape_model = mlp_from_json(j.at("mode_a").at("shape_model"));
        bank.mode_a.position_model = mlp_from_json(j.at("mode_a").at("position_model"));
        for (const json& entry : j.at("mode_b")) {
            std::uint32_t bits = entry.at("config").get<std::uint32_t>();
            ModelPair pair;
            pair.shape_model = mlp_from_json(entry.at("shape_model"));
            pair.position_model = mlp_from_json(entry.at("position_model"));
            bank.mode_b.emplace(bits, std::move(pair));
        }
        return bank;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bank json: ") + e.what());
    }
}

}  // namespace risim
