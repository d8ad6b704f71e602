#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "newsalpha/embedding_store.hpp"

namespace newsalpha {

enum class CellKind : std::uint8_t { Vanilla = 0, Lstm = 1, Gru = 2 };

std::string to_string(CellKind k);
CellKind cell_kind_from_string(std::string_view s);

struct RnnConfig {
    CellKind cell = CellKind::Lstm;
    std::vector<int> layer_widths{256, 128, 64, 32};
    double dropout = 0.5;
    std::uint64_t seed = 42;
    double learning_rate = 0.1;
    int batch_size = 32;
    int max_epochs = 30;
    int patience = 3;
    double min_improvement = 1e-4;

    /// Two small layers; sized for laptops and synthetic corpora.
    static RnnConfig desk_scale();
    void validate() const;
};

/// A sequence as a row-major (steps x dim) double matrix.
struct Sequence {
    std::size_t steps = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    static Sequence from_embedding(const HeadlineEmbedding& e);
};

struct LabeledSequence {
    Sequence input;
    int label = 0;
};

/// Offsets of one parameter matrix inside the flat parameter vector.
struct ParamBlock {
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t size() const { return rows * cols; }
};

/// Stacked recurrent classifier with a 2-way softmax head on the final state
/// of the last layer. All parameters live in one flat vector.
class RnnModel {
public:
    RnnModel() = default;
    RnnModel(RnnConfig config, std::size_t input_dim);

    const RnnConfig& config() const noexcept { return config_; }
    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t gates() const noexcept;

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    /// Per layer: input weights W (gates*h x in), recurrent weights U (gates*h x h), bias b (gates*h x 1).
    struct Layer {
        std::size_t in;
        std::size_t hidden;
        ParamBlock w, u, b;
    };
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    const ParamBlock& head_weights() const noexcept { return head_w_; }
    const ParamBlock& head_bias() const noexcept { return head_b_; }

    /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per matrix; biases use the
    /// fan-in of their layer's input weights.
    void initialize(std::uint64_t seed);
    /// Rounds every parameter to float precision, as stored in checkpoints.
    void round_to_float();

    bool operator==(const RnnModel& other) const;

private:
    RnnConfig config_;
    std::size_t input_dim_ = 0;
    std::vector<Layer> layers_;
    ParamBlock head_w_, head_b_;
    std::vector<double> params_;
};

/// Positive-class probability. Dropout is drawn from `dropout_seed` only in
/// training mode. Throws ShapeError on an input-dimension mismatch.
double forward(const RnnModel& model, const Sequence& input, bool training_mode = false,
               std::uint64_t dropout_seed = 0);
double forward(const RnnModel& model, const HeadlineEmbedding& embedding, bool training_mode = false,
               std::uint64_t dropout_seed = 0);
/// Both class probabilities (P-, P+).
std::array<double, 2> forward_probabilities(const RnnModel& model, const Sequence& input);

constexpr double kLossClamp = 1e-12;

/// Mean clamped cross-entropy in inference mode.
double loss(const RnnModel& model, std::span<const LabeledSequence> batch);

/// Mean loss and its gradient with respect to every parameter. With
/// `training_mode`, sample i uses dropout masks from `dropout_seed + i`.
double loss_and_gradient(const RnnModel& model, std::span<const LabeledSequence> batch, std::span<double> grad,
                         bool training_mode = false, std::uint64_t dropout_seed = 0);

/// Max relative error between the analytic gradient and central differences.
double gradient_check(const RnnModel& model, std::span<const LabeledSequence> batch, double eps = 1e-4);

struct TrainingEpoch {
    int epoch;
    double train_loss;
    double dev_loss;
};

struct TrainingResult {
    RnnModel model;  // best-dev-loss snapshot, rounded to float precision
    std::vector<TrainingEpoch> history;
    int best_epoch = 0;
};

/// Mini-batch SGD with early stopping on dev loss (the train set stands in
/// when `dev` is empty). Throws DegenerateTraining on a single-class train set.
TrainingResult train(const RnnConfig& config, std::span<const LabeledSequence> train_set,
                     std::span<const LabeledSequence> dev);

/// Binary checkpoint: "RNN1", a config block, then every parameter matrix as
/// u16 rows, u16 cols, f32 row-major values (little-endian).
void write_checkpoint(std::ostream& out, const RnnModel& model);
RnnModel read_checkpoint(std::istream& in);

}  // namespace newsalpha
