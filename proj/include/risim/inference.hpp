#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "risim/optimizer.hpp"
#include "risim/physics.hpp"
#include "risim/scenario.hpp"

namespace risim {

// Fully-connected ReLU network, column-per-sample convention. Input
// standardization is part of the model so a persisted network keeps working
// on raw fingerprints.
struct MlpModel {
    enum class Head { Softmax, Scalar };

    Head head = Head::Scalar;
    std::vector<Eigen::MatrixXd> weights;  // weights[l] maps layer l inputs to outputs
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd feat_mean;
    Eigen::VectorXd feat_scale;  // strictly positive

    int input_dim() const;
    int output_dim() const;

    // Raw features in, head outputs out: class probabilities for Softmax,
    // identity activations for Scalar.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
};

// Glorot-uniform weights, zero biases, identity standardization.
MlpModel init_mlp(int input, const std::vector<int>& hidden, int output, MlpModel::Head head,
                  std::uint64_t seed);

struct MlpGradients {
    std::vector<Eigen::MatrixXd> dw;
    std::vector<Eigen::VectorXd> db;
};

// Mean loss over the batch: cross-entropy against one-hot targets for the
// softmax head, 0.5 * squared error for the scalar head. Targets are one
// column per sample (class index encoded one-hot for Softmax). Gradients are
// written to `grads` when non-null.
double mlp_loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& y, MlpGradients* grads);

struct TrainSpec {
    std::vector<int> hidden = {64, 64};
    double learning_rate = 0.05;
    double momentum = 0.9;
    int batch_size = 32;
    int epochs = 200;
    std::uint64_t seed = 1;
};

struct TrainHistory {
    std::vector<double> train_loss;  // one entry per epoch, averaged over batches
    std::vector<double> val_loss;
};

// Minibatch SGD with momentum and a seeded reshuffle each epoch. Standardizes
// the model to the training features first. Throws NumericalError (with the
// failing epoch in the message) if the loss turns non-finite.
TrainHistory train_mlp(MlpModel& model, const Eigen::MatrixXd& x_train,
                       const Eigen::MatrixXd& y_train, const Eigen::MatrixXd& x_val,
                       const Eigen::MatrixXd& y_val, const TrainSpec& spec);

std::string mlp_to_json_text(const MlpModel& model);
MlpModel mlp_from_json_text(const std::string& text);

// Noisy aux-array observations stacked over a configuration series:
// [Re, Im] per aux receiver, configs in series order. Noise is complex AWGN
// with total variance sigma2 per entry.
Eigen::VectorXd generate_fingerprint(const ChannelWorkspace& state,
                                     const std::vector<RISConfig>& series, double sigma2,
                                     Rng& rng);

// Fingerprint of an already-measured aux vector (one config).
Eigen::VectorXd fingerprint_from_aux(const Eigen::VectorXcd& aux);

struct SensingDataset {
    Eigen::MatrixXd x;        // feature column per example
    Eigen::VectorXd pos;      // trajectory parameter in [0, 1]
    std::vector<int> shape;   // shape index per example
    std::vector<int> train_cols;
    std::vector<int> val_cols;  // held-out perturber positions, not just draws
};

struct DatasetSpec {
    int n_positions = 200;     // perturber samples (each paired with a shape)
    int noise_draws = 4;       // noisy examples per sample
    double snr_min_db = -10.0; // per-example SNR drawn uniformly in this range;
    double snr_max_db = 40.0;  // spans the benchmark grid so low-SNR inputs are in-distribution
    double val_fraction = 0.1;
};

// Mode A: one fingerprint per example over the fixed probe series.
SensingDataset build_mode_a_dataset(const ScenarioSpec& spec, const std::vector<RISConfig>& series,
                                    const DatasetSpec& ds, double p_ref, std::uint64_t seed);

// Mode B: per-configuration datasets sharing one set of perturber samples, so
// every config's models see the same physical states. Keys are config bits.
std::map<std::uint32_t, SensingDataset> build_mode_b_datasets(
    const ScenarioSpec& spec, const std::vector<RISConfig>& configs, const DatasetSpec& ds,
    double p_ref, std::uint64_t seed);

struct ModelPair {
    MlpModel shape_model;     // 3-way softmax
    MlpModel position_model;  // scalar, trained on p in [0, 1]
};

Shape predict_shape(const ModelPair& models, const Eigen::VectorXd& fingerprint);
Eigen::Vector3d shape_probabilities(const ModelPair& models, const Eigen::VectorXd& fingerprint);
// Clamped to [0, 1].
double predict_position(const ModelPair& models, const Eigen::VectorXd& fingerprint);

// Trained sensing models for both operating modes of one calibrated scenario.
struct InferenceBank {
    std::vector<RISConfig> mode_a_series;          // probe sequence, bootstrap order
    ModelPair mode_a;                              // trained on stacked series fingerprints
    std::map<std::uint32_t, ModelPair> mode_b;     // one pair per code-book config
    double p_ref = 1.0;
    std::uint64_t scenario_hash = 0;
    std::uint64_t master_seed = 0;
};

// Throws ValidationError if `config` has no trained models.
const ModelPair& mode_b_models(const InferenceBank& bank, const RISConfig& config);

// Mode B learns from single-config fingerprints, so it needs a denser
// dataset than mode A to reach episode-grade shape accuracy; noise draws are
// cheap (the channel solves are shared across draws).
struct BankBuildOptions {
    int series_length = 8;
    DatasetSpec mode_a_data{300, 6, -10.0, 40.0, 0.1};
    DatasetSpec mode_b_data{480, 6, -10.0, 40.0, 0.1};
    TrainSpec mode_a_shape_train{{64, 64}, 0.05, 0.9, 32, 150, 1};
    TrainSpec mode_a_position_train{{64, 64}, 0.05, 0.9, 32, 150, 1};
    TrainSpec mode_b_shape_train{{64, 64}, 0.05, 0.9, 32, 200, 1};
    TrainSpec mode_b_position_train{{64, 64}, 0.05, 0.9, 32, 200, 1};
};

struct ModelReport {
    std::string name;
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;
    double val_shape_accuracy = -1.0;  // softmax heads only, else -1
    double val_position_mae = -1.0;    // scalar heads only (trajectory fraction), else -1
};

struct BankTrainReport {
    std::vector<ModelReport> models;
};

// Builds datasets and trains every model of the bank. Mode B covers the
// distinct configs of `book` (both pair members per entry). Training seeds
// derive from master_seed per model, so bank construction is deterministic.
InferenceBank build_inference_bank(const ScenarioSpec& spec, const CodeBook& book, double p_ref,
                                   std::uint64_t master_seed, const BankBuildOptions& options,
                                   BankTrainReport* report = nullptr);

std::string bank_to_json_text(const InferenceBank& bank);
InferenceBank bank_from_json_text(const std::string& text);

}  // namespace risim
