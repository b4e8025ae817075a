#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bmi/core.hpp"
#include "bmi/preprocess.hpp"

namespace bmi {

struct Hyperparameters {
    double learning_rate = 0.003;  // base rate, annealed per step
    double rate_annealing = 1e-4;  // rate / (1 + annealing * step)
    double rate_decay = 1.0;       // extra factor^depth, depth 0 = output layer
    double momentum_start = 0.9;   // first-moment coefficient at sample 0
    double momentum_ramp = 1e5;    // samples until the stable value is reached
    double momentum_stable = 0.99;
    double weight_decay = 1e-3;  // L2 coefficient on weights (never biases)
    double adam_beta1 = 0.9;     // superseded per step by the momentum ramp
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int epochs = 300;
    int batch_size = 16;
    std::uint64_t seed = 42;
};

// Convolution parameters: kernels laid out [input map][output map][tap],
// one bias per output map.
struct KernelBank {
    int n_in = 1;
    int n_out = 16;
    int klen = 5;
    std::vector<double> k;
    std::vector<double> b;
};

// Two hidden affine+ReLU layers and an affine softmax head, row-major.
struct DenseStack {
    int in = 0;
    int h1 = 64;
    int h2 = 32;
    int out = 0;
    std::vector<double> W1, b1;
    std::vector<double> W2, b2;
    std::vector<double> W3, b3;
};

// Adam accumulators, one m/v pair per parameter tensor. beta1_product is
// the running product of the per-step momentum values, used in place of
// beta1^t for bias correction because the coefficient varies per step.
struct OptimizerState {
    std::vector<double> m_k, v_k, m_kb, v_kb;
    std::vector<double> m_W1, v_W1, m_b1, v_b1;
    std::vector<double> m_W2, v_W2, m_b2, v_b2;
    std::vector<double> m_W3, v_W3, m_b3, v_b3;
    std::int64_t step = 0;          // completed updates
    std::int64_t samples_seen = 0;  // examples consumed by completed updates
    double beta1_product = 1.0;
};

struct NetworkModel {
    Hyperparameters hp;
    int input_len = 60;
    int pool = 2;
    std::int64_t scale_w = 3000;  // normalization used at training time
    KernelBank bank;
    DenseStack dense;
    std::vector<ApplianceClass> classes;  // softmax index -> class
    OptimizerState opt;

    int pooled_len() const;  // per-map length after conv and pooling
};

// Intermediate maps of one forward pass, retained for backpropagation.
struct ForwardCache {
    std::vector<double> x0;              // input, length L
    std::vector<double> z1, a1;          // conv pre-activation / ReLU
    std::vector<double> p1;              // pooled maps
    std::vector<int> argmax;             // pooling source indices
    std::vector<double> z2, a2, z3, a3;  // dense hidden layers
    std::vector<double> logits, probs;
};

struct Gradients {
    std::vector<double> k, kb, W1, b1, W2, b2, W3, b3;
};

struct EpochStats {
    double train_loss = 0.0;  // mean cross-entropy per example
    double train_accuracy = 0.0;
    double validation_loss = 0.0;
    double validation_accuracy = 0.0;
};
using TrainHistory = std::vector<EpochStats>;

double lr_schedule(const Hyperparameters& hp, std::int64_t step, int layer_depth);
double momentum_schedule(const Hyperparameters& hp, std::int64_t samples_seen);

// Gaussian He draws with variance 2/fan_in.
std::vector<double> he_init(std::size_t count, std::size_t fan_in, std::uint64_t seed);

// Freshly initialized model: He weights, zero biases, zero optimizer state.
NetworkModel make_model(int input_len, int pool, int n_kernels, int klen, int h1, int h2,
                        const std::vector<ApplianceClass>& classes, const Hyperparameters& hp);

// Numerically stable softmax (max subtraction).
std::vector<double> softmax(const std::vector<double>& logits);

// Sum over examples of -sum_i Y[n][i] * log(max(y[n][i], 1e-12)).
double cross_entropy(const std::vector<double>& targets_onehot,
                     const std::vector<double>& predictions, int n, int classes);

// One forward pass; throws KernelTooLong / DimensionMismatch.
void forward(const NetworkModel& model, const std::vector<double>& x, ForwardCache& cache);

Gradients zero_gradients(const NetworkModel& model);

// Batch objective: cross-entropy sum plus decay/2 * ||weights||^2.
double batch_loss(const NetworkModel& model, const std::vector<const Segment*>& batch,
                  const std::vector<std::size_t>& targets);

// Accumulates exact objective gradients over the batch into g; returns the
// batch objective value.
double backprop_batch(const NetworkModel& model, const std::vector<const Segment*>& batch,
                      const std::vector<std::size_t>& targets, Gradients& g);

// One Adam step. The first-moment coefficient comes from the momentum ramp
// at the CURRENT samples_seen; the step counter feeds rate annealing.
void update_parameters(NetworkModel& model, const Gradients& g, std::int64_t batch_examples);

// Mini-batch training; retains the parameters of the best-validation-loss
// epoch. Deterministic in (model state, split, hyperparameters).
TrainHistory train(NetworkModel& model, const DatasetSplit& split);

// Mean loss / accuracy over a labeled segment list.
std::pair<double, double> evaluate(const NetworkModel& model, const std::vector<Segment>& segs);

// Argmax class (lowest index on exact ties) and its probability. The
// segment must already be on the model's normalized scale.
std::pair<ApplianceClass, double> classify_segment(const NetworkModel& model, const Segment& seg);

// Slides half-overlapping windows over the stream, classifies each, decodes
// composite labels, and merges touching same-appliance detections. Emits
// one single-appliance event per merged run.
std::vector<DetectionEvent> detect_events(const NetworkModel& model, const ValidatedStream& stream,
                                          double confidence_floor = 0.5);

// Versioned little-endian binary checkpoint (magic "BMIC").
void save_checkpoint(const NetworkModel& model, const std::string& path);
NetworkModel load_checkpoint(const std::string& path);

}  // namespace bmi
