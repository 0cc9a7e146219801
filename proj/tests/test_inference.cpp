#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "risim/errors.hpp"
#include "risim/inference.hpp"
#include "risim/rng.hpp"
#include "risim/scenario.hpp"

namespace {

using risim::MlpModel;

// Central finite differences against the analytic gradients; returns the
// worst relative error over every parameter.
double gradient_check(MlpModel model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    risim::MlpGradients grads;
    risim::mlp_loss_and_gradients(model, x, y, &grads);

    const double eps = 1e-6;
    double worst = 0.0;
    auto probe = [&](double& value, double analytic) {
        const double saved = value;
        value = saved + eps;
        const double hi = risim::mlp_loss_and_gradients(model, x, y, nullptr);
        value = saved - eps;
        const double lo = risim::mlp_loss_and_gradients(model, x, y, nullptr);
        value = saved;
        const double fd = (hi - lo) / (2.0 * eps);
        worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(fd)));
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (Eigen::Index i = 0; i < model.weights[l].rows(); ++i) {
            for (Eigen::Index j = 0; j < model.weights[l].cols(); ++j)
                probe(model.weights[l](i, j), grads.dw[l](i, j));
            probe(model.biases[l](i), grads.db[l](i));
        }
    }
    return worst;
}

bool exactly_equal(const MlpModel& a, const MlpModel& b) {
    if (a.head != b.head || a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l)
        if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    return a.feat_mean == b.feat_mean && a.feat_scale == b.feat_scale;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("initialization fixes shapes and glorot bounds") {
    const MlpModel m = risim::init_mlp(5, {7, 4}, 3, MlpModel::Head::Softmax, 99);
    REQUIRE(m.weights.size() == 3);
    CHECK(m.weights[0].rows() == 7);
    CHECK(m.weights[0].cols() == 5);
    CHECK(m.weights[1].rows() == 4);
    CHECK(m.weights[1].cols() == 7);
    CHECK(m.weights[2].rows() == 3);
    CHECK(m.weights[2].cols() == 4);
    CHECK(m.input_dim() == 5);
    CHECK(m.output_dim() == 3);
    for (const Eigen::VectorXd& b : m.biases) CHECK(b.isZero(0.0));
    CHECK(m.feat_mean.isZero(0.0));
    CHECK(m.feat_scale == Eigen::VectorXd::Ones(5));

    const double limit0 = std::sqrt(6.0 / (5 + 7));
    CHECK(m.weights[0].cwiseAbs().maxCoeff() <= limit0);
    CHECK(m.weights[0].cwiseAbs().maxCoeff() > 0.0);

    const MlpModel same = risim::init_mlp(5, {7, 4}, 3, MlpModel::Head::Softmax, 99);
    CHECK(exactly_equal(m, same));
    const MlpModel other = risim::init_mlp(5, {7, 4}, 3, MlpModel::Head::Softmax, 100);
    CHECK(!exactly_equal(m, other));

    CHECK_THROWS_AS(risim::init_mlp(0, {}, 1, MlpModel::Head::Scalar, 1), std::invalid_argument);
    CHECK_THROWS_AS(risim::init_mlp(1, {0}, 1, MlpModel::Head::Scalar, 1), std::invalid_argument);
}

TEST_CASE("single linear layer computes wx plus b exactly") {
    MlpModel m = risim::init_mlp(3, {}, 2, MlpModel::Head::Scalar, 1);
    m.weights[0] << 1.0, -2.0, 0.5, 0.0, 3.0, -1.0;
    m.biases[0] << 0.25, -0.75;

    Eigen::MatrixXd x(3, 2);
    x << 1.0, 0.0, 2.0, -1.0, 4.0, 0.5;
    const Eigen::MatrixXd y = m.forward(x);
    const Eigen::MatrixXd want = m.weights[0] * x + m.biases[0].replicate(1, 2);
    CHECK((y - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standardization is part of the forward pass") {
    MlpModel m = risim::init_mlp(2, {}, 1, MlpModel::Head::Scalar, 1);
    m.weights[0] << 2.0, -1.0;
    m.biases[0] << 0.5;
    m.feat_mean << 10.0, -3.0;
    m.feat_scale << 4.0, 0.5;

    Eigen::MatrixXd x(2, 1);
    x << 18.0, -2.0;  // standardized: (2, 2)
    CHECK(m.forward(x)(0, 0) == doctest::Approx(2.0 * 2.0 - 1.0 * 2.0 + 0.5).epsilon(1e-15));
}

TEST_CASE("softmax head returns stable normalized probabilities") {
    MlpModel m = risim::init_mlp(2, {}, 3, MlpModel::Head::Softmax, 1);
    m.weights[0].setZero();
    m.biases[0].setZero();
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 4);
    const Eigen::MatrixXd p = m.forward(x);
    for (int c = 0; c < 4; ++c) {
        CHECK(p.col(c).sum() == doctest::Approx(1.0).epsilon(1e-12));
        for (int r = 0; r < 3; ++r) CHECK(p(r, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }

    // Large logits must not overflow.
    m.biases[0] << 1000.0, 0.0, -1000.0;
    const Eigen::MatrixXd q = m.forward(x);
    CHECK(q.allFinite());
    CHECK(q(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

    // Uniform probabilities against any one-hot target give ln(3) loss.
    m.biases[0].setZero();
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, 4);
    for (int c = 0; c < 4; ++c) y(c % 3, c) = 1.0;
    CHECK(risim::mlp_loss_and_gradients(m, x, y, nullptr) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("scalar loss is half the mean squared error") {
    MlpModel m = risim::init_mlp(3, {4}, 2, MlpModel::Head::Scalar, 5);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 6);
    const Eigen::MatrixXd clean = m.forward(x);
    CHECK(risim::mlp_loss_and_gradients(m, x, clean, nullptr) == doctest::Approx(0.0));

    Eigen::MatrixXd off = clean;
    off.row(0).array() += 0.3;  // each column off by (0.3, 0)
    CHECK(risim::mlp_loss_and_gradients(m, x, off, nullptr) ==
          doctest::Approx(0.5 * 0.3 * 0.3).epsilon(1e-12));

    // Duplicating the batch leaves the mean loss unchanged.
    Eigen::MatrixXd x2(3, 12), y2(2, 12);
    x2 << x, x;
    y2 << off, off;
    CHECK(risim::mlp_loss_and_gradients(m, x2, y2, nullptr) ==
          doctest::Approx(0.5 * 0.3 * 0.3).epsilon(1e-12));

    CHECK_THROWS_AS(risim::mlp_loss_and_gradients(m, x, clean.topRows(1), nullptr),
                    std::invalid_argument);
}

TEST_CASE("analytic gradients match finite differences on both heads") {
    risim::Rng rng = risim::make_rng(31);
    Eigen::MatrixXd x(4, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x.data()[i] = risim::uniform_real(rng, -1.5, 1.5);

    MlpModel soft = risim::init_mlp(4, {5}, 3, MlpModel::Head::Softmax, 7);
    Eigen::MatrixXd y_soft = Eigen::MatrixXd::Zero(3, 6);
    for (int c = 0; c < 6; ++c) y_soft(static_cast<int>(rng() % 3), c) = 1.0;
    CHECK(gradient_check(soft, x, y_soft) < 1e-4);

    MlpModel scal = risim::init_mlp(4, {5, 3}, 2, MlpModel::Head::Scalar, 8);
    Eigen::MatrixXd y_scal(2, 6);
    for (Eigen::Index i = 0; i < y_scal.size(); ++i)
        y_scal.data()[i] = risim::uniform_real(rng, -1.0, 1.0);
    CHECK(gradient_check(scal, x, y_scal) < 1e-4);

    // Nontrivial standardization must not break the chain rule.
    scal.feat_mean << 0.5, -0.25, 1.0, 0.0;
    scal.feat_scale << 2.0, 0.5, 1.5, 3.0;
    CHECK(gradient_check(scal, x, y_scal) < 1e-4);
}

TEST_CASE("training solves xor and logs both loss curves") {
    Eigen::MatrixXd x(2, 4);
    x << 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0;
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 4);
    const int labels[4] = {0, 1, 1, 0};
    for (int c = 0; c < 4; ++c) y(labels[c], c) = 1.0;

    MlpModel m = risim::init_mlp(2, {8}, 2, MlpModel::Head::Softmax, 3);
    risim::TrainSpec spec;
    spec.hidden = {8};
    spec.learning_rate = 0.3;
    spec.momentum = 0.9;
    spec.batch_size = 4;
    spec.epochs = 2000;
    spec.seed = 3;
    const risim::TrainHistory hist = risim::train_mlp(m, x, y, x, y, spec);

    REQUIRE(hist.train_loss.size() == 2000);
    REQUIRE(hist.val_loss.size() == 2000);
    CHECK(hist.train_loss.back() < hist.train_loss.front());
    CHECK(hist.train_loss.back() < 0.05);

    const Eigen::MatrixXd p = m.forward(x);
    for (int c = 0; c < 4; ++c) {
        int arg = 0;
        p.col(c).maxCoeff(&arg);
        CHECK(arg == labels[c]);
    }

    // Standardization came from the training features (population moments).
    CHECK(m.feat_mean(0) == doctest::Approx(0.5));
    CHECK(m.feat_scale(0) == doctest::Approx(0.5));
}

TEST_CASE("training is seeded and detects divergence") {
    risim::Rng rng = risim::make_rng(17);
    Eigen::MatrixXd x(3, 40);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = risim::standard_normal(rng);
    Eigen::MatrixXd y = x.topRows(1) * 2.0;

    risim::TrainSpec spec;
    spec.hidden = {6};
    spec.epochs = 30;
    spec.batch_size = 8;
    spec.seed = 5;

    MlpModel a = risim::init_mlp(3, {6}, 1, MlpModel::Head::Scalar, 2);
    MlpModel b = a;
    risim::train_mlp(a, x, y, x, y, spec);
    risim::train_mlp(b, x, y, x, y, spec);
    CHECK(exactly_equal(a, b));

    MlpModel diverging = risim::init_mlp(3, {6}, 1, MlpModel::Head::Scalar, 2);
    risim::TrainSpec hot = spec;
    hot.learning_rate = 1e9;
    CHECK_THROWS_WITH_AS(risim::train_mlp(diverging, x, y, x, y, hot),
                         doctest::Contains("epoch"), risim::NumericalError);
}

TEST_CASE("model json round trips bit for bit") {
    MlpModel m = risim::init_mlp(4, {5}, 3, MlpModel::Head::Softmax, 77);
    m.feat_mean << 0.1, -2.5, 1e-17, 3.0;
    m.feat_scale << 1.0, 0.25, 7.5, 1e-8;
    const std::string text = risim::mlp_to_json_text(m);
    const MlpModel back = risim::mlp_from_json_text(text);
    CHECK(exactly_equal(m, back));
    CHECK(back.head == MlpModel::Head::Softmax);

    CHECK_THROWS_AS(risim::mlp_from_json_text("not json"), risim::ValidationError);
    CHECK_THROWS_AS(risim::mlp_from_json_text("{}"), risim::ValidationError);
}

TEST_CASE("fingerprints stack re and im per aux receiver in series order") {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    const risim::ChannelWorkspace ws(risim::compile_scenario(spec, {}));
    const std::vector<risim::RISConfig> series = {{0x15u}, {0x0au}};

    risim::Rng rng = risim::make_rng(1);
    const Eigen::VectorXd clean = risim::generate_fingerprint(ws, series, 0.0, rng);
    REQUIRE(clean.size() == 2 * 2 * 8);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const Eigen::VectorXcd aux = ws.evaluate(series[i]).aux;
        const Eigen::VectorXd part = risim::fingerprint_from_aux(aux);
        CHECK((clean.segment(static_cast<Eigen::Index>(i) * 16, 16) - part).norm() == 0.0);
        for (int k = 0; k < 8; ++k) {
            CHECK(part(2 * k) == aux(k).real());
            CHECK(part(2 * k + 1) == aux(k).imag());
        }
    }

    // Same rng state, same noise.
    risim::Rng r1 = risim::make_rng(42), r2 = risim::make_rng(42);
    const Eigen::VectorXd n1 = risim::generate_fingerprint(ws, series, 0.01, r1);
    const Eigen::VectorXd n2 = risim::generate_fingerprint(ws, series, 0.01, r2);
    CHECK(n1 == n2);
    CHECK((n1 - clean).norm() > 0.0);

    // Noise statistics: variance sigma2/2 per quadrature entry.
    const double sigma2 = 0.04;
    const std::vector<risim::RISConfig> single = {{0x15u}};
    risim::Rng rs = risim::make_rng(9);
    const int reps = 4000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(16), sum_sq = Eigen::VectorXd::Zero(16);
    for (int r = 0; r < reps; ++r) {
        const Eigen::VectorXd f = risim::generate_fingerprint(ws, single, sigma2, rs);
        sum += f;
        sum_sq += f.cwiseProduct(f);
    }
    const Eigen::VectorXd mean = sum / reps;
    const Eigen::VectorXd var = sum_sq / reps - mean.cwiseProduct(mean);
    CHECK((mean - clean.head(16)).cwiseAbs().maxCoeff() < 5.0 * std::sqrt(sigma2 / 2 / reps));
    for (int k = 0; k < 16; ++k)
        CHECK(var(k) == doctest::Approx(0.5 * sigma2).epsilon(0.15));

    risim::Rng r3 = risim::make_rng(1);
    CHECK_THROWS_AS(risim::generate_fingerprint(ws, {}, 0.0, r3), std::invalid_argument);
    CHECK_THROWS_AS(risim::generate_fingerprint(ws, series, -1.0, r3), std::invalid_argument);
}

TEST_CASE("mode a dataset splits by perturber position without leakage") {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    const std::vector<risim::RISConfig> series = {{0x3u}, {0x1c0u}};
    risim::DatasetSpec ds;
    ds.n_positions = 12;
    ds.noise_draws = 2;
    ds.val_fraction = 0.25;

    const risim::SensingDataset data = risim::build_mode_a_dataset(spec, series, ds, 1e-3, 4);
    REQUIRE(data.x.cols() == 24);
    REQUIRE(data.x.rows() == 32);  // 8 aux * 2 quadratures * 2 configs
    REQUIRE(data.pos.size() == 24);
    REQUIRE(data.shape.size() == 24);

    for (int c = 0; c < 24; ++c) {
        CHECK(data.pos(c) >= 0.0);
        CHECK(data.pos(c) <= 1.0);
        CHECK(data.shape[static_cast<std::size_t>(c)] >= 0);
        CHECK(data.shape[static_cast<std::size_t>(c)] < 3);
    }

    // Noise draws of one position agree on the labels.
    for (int p = 0; p < 12; ++p) {
        CHECK(data.pos(2 * p) == data.pos(2 * p + 1));
        CHECK(data.shape[static_cast<std::size_t>(2 * p)] ==
              data.shape[static_cast<std::size_t>(2 * p) + 1]);
    }

    // Disjoint, exhaustive, and position-aligned split: both draws of a
    // position land on the same side.
    CHECK(data.val_cols.size() == 6);  // round(0.25 * 12) positions * 2 draws
    CHECK(data.train_cols.size() + data.val_cols.size() == 24);
    std::set<int> seen;
    for (int c : data.train_cols) seen.insert(c);
    for (int c : data.val_cols) seen.insert(c);
    CHECK(seen.size() == 24);
    std::set<int> val_positions;
    for (int c : data.val_cols) val_positions.insert(c / 2);
    CHECK(val_positions.size() == 3);
    for (int c : data.train_cols) CHECK(val_positions.count(c / 2) == 0);

    const risim::SensingDataset same = risim::build_mode_a_dataset(spec, series, ds, 1e-3, 4);
    CHECK(data.x == same.x);
    CHECK(data.train_cols == same.train_cols);

    CHECK_THROWS_AS(risim::build_mode_a_dataset(spec, {}, ds, 1e-3, 4), std::invalid_argument);
    CHECK_THROWS_AS(risim::build_mode_a_dataset(spec, series, ds, 0.0, 4),
                    std::invalid_argument);
}

TEST_CASE("mode b datasets share perturber samples across deduplicated configs") {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    const risim::RISConfig c1{0x7u}, c2{0x38u};
    risim::DatasetSpec ds;
    ds.n_positions = 8;
    ds.noise_draws = 2;
    ds.val_fraction = 0.2;

    const auto sets = risim::build_mode_b_datasets(spec, {c1, c2, c1}, ds, 1e-3, 6);
    REQUIRE(sets.size() == 2);
    REQUIRE(sets.count(c1.bits) == 1);
    REQUIRE(sets.count(c2.bits) == 1);

    const risim::SensingDataset& a = sets.at(c1.bits);
    const risim::SensingDataset& b = sets.at(c2.bits);
    CHECK(a.x.rows() == 16);  // single-config fingerprint
    CHECK(a.x.cols() == 16);
    CHECK(a.pos == b.pos);
    CHECK(a.shape == b.shape);
    CHECK(a.train_cols == b.train_cols);
    CHECK(a.x != b.x);

    CHECK_THROWS_AS(risim::build_mode_b_datasets(spec, {}, ds, 1e-3, 6), std::invalid_argument);
}

TEST_CASE("prediction helpers clamp and argmax") {
    risim::ModelPair pair;
    pair.shape_model = risim::init_mlp(4, {}, 3, MlpModel::Head::Softmax, 1);
    pair.shape_model.weights[0].setZero();
    pair.shape_model.biases[0] << 0.0, 2.0, -1.0;
    pair.position_model = risim::init_mlp(4, {}, 1, MlpModel::Head::Scalar, 1);
    pair.position_model.weights[0].setZero();

    const Eigen::VectorXd f = Eigen::VectorXd::Zero(4);
    CHECK(risim::predict_shape(pair, f) == risim::Shape::Circle);
    const Eigen::Vector3d probs = risim::shape_probabilities(pair, f);
    CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(probs(1) > probs(0));

    pair.position_model.biases[0] << 7.0;
    CHECK(risim::predict_position(pair, f) == 1.0);
    pair.position_model.biases[0] << -7.0;
    CHECK(risim::predict_position(pair, f) == 0.0);
    pair.position_model.biases[0] << 0.375;
    CHECK(risim::predict_position(pair, f) == doctest::Approx(0.375));
}

TEST_CASE("bank construction trains both modes and round trips") {
    const risim::ScenarioSpec spec = risim::default_scenario_spec();
    const double length = risim::Trajectory{spec.trajectory}.length();
    const risim::CodeBook book = risim::build_codebook(spec, 2.0 * length, 23, 12);

    risim::BankBuildOptions opt;
    opt.series_length = 2;
    opt.mode_a_data = {10, 2, 0.0, 40.0, 0.2};
    opt.mode_b_data = {8, 2, 0.0, 40.0, 0.25};
    for (risim::TrainSpec* t : {&opt.mode_a_shape_train, &opt.mode_a_position_train,
                                &opt.mode_b_shape_train, &opt.mode_b_position_train}) {
        t->hidden = {8};
        t->epochs = 6;
    }

    risim::BankTrainReport report;
    const risim::InferenceBank bank =
        risim::build_inference_bank(spec, book, 2.5e-3, 23, opt, &report);

    REQUIRE(bank.mode_a_series.size() == 2);
    CHECK(bank.p_ref == 2.5e-3);
    CHECK(bank.master_seed == 23);
    CHECK(bank.scenario_hash == risim::scenario_hash(spec));
    CHECK(bank.mode_a.shape_model.input_dim() == 32);
    CHECK(bank.mode_a.position_model.output_dim() == 1);

    // One model pair per distinct config of the book.
    std::set<std::uint32_t> distinct;
    for (const risim::CodeBookEntry& e : book.entries) {
        distinct.insert(e.pair.c0.bits);
        distinct.insert(e.pair.c1.bits);
    }
    CHECK(bank.mode_b.size() == distinct.size());
    for (std::uint32_t bits : distinct) {
        const risim::ModelPair& mp = risim::mode_b_models(bank, {bits});
        CHECK(mp.shape_model.input_dim() == 16);
        CHECK(mp.shape_model.output_dim() == 3);
    }
    CHECK_THROWS_AS(risim::mode_b_models(bank, {0x1ffffffu ^ *distinct.begin()}),
                    risim::ValidationError);

    CHECK(report.models.size() == 2 + 2 * distinct.size());
    for (const risim::ModelReport& mr : report.models) {
        CHECK(!mr.name.empty());
        CHECK(std::isfinite(mr.final_train_loss));
    }

    const std::string text = risim::bank_to_json_text(bank);
    const risim::InferenceBank back = risim::bank_from_json_text(text);
    CHECK(back.mode_a_series.size() == bank.mode_a_series.size());
    for (std::size_t i = 0; i < bank.mode_a_series.size(); ++i)
        CHECK(back.mode_a_series[i] == bank.mode_a_series[i]);
    CHECK(exactly_equal(back.mode_a.shape_model, bank.mode_a.shape_model));
    CHECK(exactly_equal(back.mode_a.position_model, bank.mode_a.position_model));
    CHECK(back.p_ref == bank.p_ref);
    CHECK(back.scenario_hash == bank.scenario_hash);
    REQUIRE(back.mode_b.size() == bank.mode_b.size());
    for (const auto& [bits, mp] : bank.mode_b)
        CHECK(exactly_equal(back.mode_b.at(bits).position_model, mp.position_model));

    CHECK_THROWS_AS(risim::bank_from_json_text("[1,2]"), risim::ValidationError);
}

}  // TEST_SUITE
