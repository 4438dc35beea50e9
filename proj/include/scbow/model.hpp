#ifndef SCBOW_MODEL_HPP_
#define SCBOW_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scbow/corpus.hpp"
#include "scbow/rng.hpp"

namespace scbow {

// V x d table of word vectors, row-major. The model's only trainable
// parameters.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t vocab_size, std::size_t dim);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }

  std::span<double> row(std::size_t i) {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const EmbeddingMatrix& other) const = default;

 private:
  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

// Entries drawn i.i.d. from Normal(0, 0.01), deterministic per seed.
EmbeddingMatrix init_embeddings(std::size_t vocab_size, std::size_t dim,
                                uint64_t seed);

// (1/|T|) sum of the rows named by the sentence: exactly |T|-1 vector
// additions followed by one scalar multiplication.
std::vector<double> average_embedding(const EmbeddingMatrix& matrix,
                                      const TokenizedSentence& sentence);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

// a.b / (|a||b|), clamped to [-1, 1]. Throws ZeroVector on zero-norm input.
double cosine(std::span<const double> a, std::span<const double> b);

// Uniform mass 1/n_pos on the first n_pos entries, zero elsewhere.
std::vector<double> target_distribution(std::size_t n_pos, std::size_t n_neg);

// Everything one forward pass computes, cached so the backward pass can
// reuse it instead of recomputing.
struct ForwardTrace {
  std::vector<double> center_embedding;
  std::vector<std::vector<double>> candidate_embeddings;  // positives, then
                                                          // negatives
  std::vector<double> cosines;
  std::vector<double> probabilities;
  double center_norm = 0.0;
  std::vector<double> candidate_norms;
};

// Averaged embeddings, cosines against the center, and a softmax over the
// cosines (computed with max subtraction). Throws ZeroVector when any
// sentence embedding has zero norm.
ForwardTrace forward(const EmbeddingMatrix& matrix,
                     const TrainingExample& example);

// Categorical cross-entropy against the target distribution.
double loss(const ForwardTrace& trace, std::span<const double> target);

// Accumulated loss gradient per embedding row. Only rows of words present
// in the example's sentences appear.
class SparseGradient {
 public:
  explicit SparseGradient(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_.empty(); }

  // rows[index] += scale * g
  void accumulate(uint32_t row_index, std::span<const double> g, double scale);
  void scale(double factor);

  const std::unordered_map<uint32_t, std::vector<double>>& rows() const {
    return rows_;
  }

 private:
  std::size_t dim_;
  std::unordered_map<uint32_t, std::vector<double>> rows_;
};

// Exact analytic gradient of the cross-entropy loss with respect to every
// participating embedding row. Words appearing several times, or in several
// sentences of the example, accumulate one contribution per occurrence.
SparseGradient backward(const EmbeddingMatrix& matrix,
                        const TrainingExample& example,
                        const ForwardTrace& trace,
                        std::span<const double> target);

// As backward, but accumulating into an existing gradient (batch use).
void backward_into(const EmbeddingMatrix& matrix,
                   const TrainingExample& example, const ForwardTrace& trace,
                   std::span<const double> target, SparseGradient& out);

// alpha(t) = alpha0 * max(floor_fraction, 1 - t/total); linear decay over
// the whole run.
double lr_schedule(double initial_lr, uint64_t batches_done,
                   uint64_t total_batches, double floor_fraction);

// row[i] -= lr * grad[i] for the rows named by the gradient; all other rows
// are untouched.
void sgd_step(EmbeddingMatrix& matrix, const SparseGradient& grad, double lr);

struct TrainConfig {
  std::size_t dim = 300;
  std::size_t n_negatives = 2;
  std::size_t batch_size = 100;
  double initial_lr = 0.0001;
  std::size_t epochs = 1;
  uint64_t seed = 1;
  uint32_t min_count = 5;
  double lr_floor_fraction = 0.0;
  // Emit a progress event every this many examples (0 = epoch ends only).
  uint64_t progress_every = 0;
  // Return after this many epochs even if fewer than `epochs` (0 = run all).
  // The returned optimizer state resumes the remainder exactly.
  std::size_t stop_after_epochs = 0;

  void validate() const;
};

struct ProgressEvent {
  uint64_t examples_done = 0;
  uint64_t batches_done = 0;
  uint64_t epoch = 0;
  double interval_mean_loss = 0.0;
  double examples_per_sec = 0.0;
  uint64_t skipped_examples = 0;  // cumulative
};

using ProgressSink = std::function<void(const ProgressEvent&)>;

struct TrainingMetrics {
  std::vector<double> batch_losses;  // mean loss of each applied batch
  uint64_t examples_seen = 0;
  uint64_t skipped_examples = 0;
  double wall_seconds = 0.0;  // epoch loop only, initialization excluded
};

// Everything beyond the matrix needed to continue a run bit-exactly.
struct OptimizerState {
  uint64_t batches_done = 0;
  uint64_t total_batches = 0;
  uint64_t seed = 0;
  std::string rng_state;
};

struct TrainResult {
  EmbeddingMatrix matrix;
  TrainingMetrics metrics;
  OptimizerState state;
};

// Runs config.epochs shuffled passes over the corpus windows, averaging
// gradients over each batch and applying one SGD step per batch at the
// scheduled learning rate. Single-threaded; reruns with identical inputs
// are bit-identical. Pass a checkpointed (matrix, state) to resume; resume
// is only supported at epoch boundaries.
TrainResult train(const CorpusIndex& index, const Vocabulary& vocab,
                  const TrainConfig& config, const ProgressSink& progress = {},
                  const EmbeddingMatrix* resume_matrix = nullptr,
                  const OptimizerState* resume_state = nullptr);

}  // namespace scbow

#endif  // SCBOW_MODEL_HPP_
