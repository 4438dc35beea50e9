#include "scbow/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "scbow/errors.hpp"

namespace scbow {

EmbeddingMatrix::EmbeddingMatrix(std::size_t vocab_size, std::size_t dim)
    : vocab_size_(vocab_size), dim_(dim), values_(vocab_size * dim, 0.0) {
  if (vocab_size == 0 || dim == 0) {
    throw InvalidConfig("embedding matrix needs vocab_size >= 1 and dim >= 1");
  }
}

EmbeddingMatrix init_embeddings(std::size_t vocab_size, std::size_t dim,
                                uint64_t seed) {
  EmbeddingMatrix matrix(vocab_size, dim);
  Rng rng(mix_seed(seed, 0));
  for (double& value : matrix.values()) {
    value = rng.normal(0.0, 0.01);
  }
  return matrix;
}

std::vector<double> average_embedding(const EmbeddingMatrix& matrix,
                                      const TokenizedSentence& sentence) {
  if (sentence.empty()) {
    throw EmptySentence("cannot average an empty sentence");
  }
  const std::size_t d = matrix.dim();
  for (const uint32_t id : sentence.token_ids) {
    if (id >= matrix.vocab_size()) {
      throw Corrupted("token id " + std::to_string(id) +
                      " outside the embedding matrix");
    }
  }
  const auto first = matrix.row(sentence.token_ids[0]);
  std::vector<double> acc(first.begin(), first.end());
  for (std::size_t t = 1; t < sentence.token_ids.size(); ++t) {
    const auto row = matrix.row(sentence.token_ids[t]);
    for (std::size_t k = 0; k < d; ++k) acc[k] += row[k];
  }
  const double inv = 1.0 / static_cast<double>(sentence.token_ids.size());
  for (std::size_t k = 0; k < d; ++k) acc[k] *= inv;
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidExample("cosine of vectors with different dimensions");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw ZeroVector("cosine of a zero-norm vector is undefined");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::vector<double> target_distribution(std::size_t n_pos, std::size_t n_neg) {
  if (n_pos == 0) {
    throw InvalidExample("an example needs at least one positive sentence");
  }
  std::vector<double> target(n_pos + n_neg, 0.0);
  const double mass = 1.0 / static_cast<double>(n_pos);
  for (std::size_t j = 0; j < n_pos; ++j) target[j] = mass;
  return target;
}

ForwardTrace forward(const EmbeddingMatrix& matrix,
                     const TrainingExample& example) {
  ForwardTrace trace;
  trace.center_embedding = average_embedding(matrix, example.center);
  trace.center_norm = norm(trace.center_embedding);
  if (trace.center_norm == 0.0) {
    throw ZeroVector("center sentence embedding has zero norm");
  }

  const std::size_t k = example.positives.size() + example.negatives.size();
  trace.candidate_embeddings.reserve(k);
  trace.candidate_norms.reserve(k);
  trace.cosines.reserve(k);

  const auto add_candidate = [&](const TokenizedSentence& sentence) {
    auto embedding = average_embedding(matrix, sentence);
    const double n = norm(embedding);
    if (n == 0.0) {
      throw ZeroVector("candidate sentence embedding has zero norm");
    }
    const double cos = std::clamp(
        dot(trace.center_embedding, embedding) / (trace.center_norm * n),
        -1.0, 1.0);
    trace.candidate_embeddings.push_back(std::move(embedding));
    trace.candidate_norms.push_back(n);
    trace.cosines.push_back(cos);
  };
  for (const auto& sentence : example.positives) add_candidate(sentence);
  for (const auto& sentence : example.negatives) add_candidate(sentence);

  // Softmax over the cosines. Cosines are bounded, but subtracting the max
  // costs nothing and removes the overflow question entirely.
  const double max_cos =
      *std::max_element(trace.cosines.begin(), trace.cosines.end());
  trace.probabilities.resize(k);
  double denom = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    trace.probabilities[j] = std::exp(trace.cosines[j] - max_cos);
    denom += trace.probabilities[j];
  }
  for (std::size_t j = 0; j < k; ++j) trace.probabilities[j] /= denom;
  return trace;
}

double loss(const ForwardTrace& trace, std::span<const double> target) {
  if (target.size() != trace.probabilities.size()) {
    throw InvalidExample("target length does not match candidate count");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (target[j] != 0.0) {
      total -= target[j] * std::log(trace.probabilities[j]);
    }
  }
  return total;
}

void SparseGradient::accumulate(uint32_t row_index, std::span<const double> g,
                                double scale) {
  auto [it, inserted] = rows_.try_emplace(row_index);
  if (inserted) it->second.assign(dim_, 0.0);
  auto& row = it->second;
  for (std::size_t k = 0; k < dim_; ++k) row[k] += scale * g[k];
}

void SparseGradient::scale(double factor) {
  for (auto& [index, row] : rows_) {
    for (double& value : row) value *= factor;
  }
}

// The loss reaches each embedding row through three chained maps:
// softmax-with-cross-entropy (whose gradient in the cosines is
// probabilities - target), the cosine against each candidate, and the
// sentence average (a 1/|T| Jacobian per occurrence). The center embedding
// collects a term from every candidate cosine; each candidate embedding
// only from its own. Rows shared between sentences accumulate both roles.
void backward_into(const EmbeddingMatrix& matrix,
                   const TrainingExample& example, const ForwardTrace& trace,
                   std::span<const double> target, SparseGradient& out) {
  const std::size_t k = trace.cosines.size();
  if (k != example.positives.size() + example.negatives.size()) {
    throw InvalidExample("trace does not belong to this example");
  }
  if (target.size() != k) {
    throw InvalidExample("target length does not match candidate count");
  }
  const std::size_t d = matrix.dim();

  const auto& c = trace.center_embedding;
  const double cn = trace.center_norm;
  const double inv_cn_sq = 1.0 / (cn * cn);

  std::vector<double> g_center(d, 0.0);
  std::vector<double> g_candidate(d);
  for (std::size_t j = 0; j < k; ++j) {
    const double dcos = trace.probabilities[j] - target[j];
    const auto& a = trace.candidate_embeddings[j];
    const double an = trace.candidate_norms[j];
    const double cos_j = trace.cosines[j];
    const double inv_cn_an = 1.0 / (cn * an);
    const double inv_an_sq = 1.0 / (an * an);

    // d cos(c, a)/dc = a/(|c||a|) - cos * c/|c|^2, and symmetrically for a
    for (std::size_t t = 0; t < d; ++t) {
      g_center[t] += dcos * (a[t] * inv_cn_an - cos_j * c[t] * inv_cn_sq);
      g_candidate[t] = dcos * (c[t] * inv_cn_an - cos_j * a[t] * inv_an_sq);
    }

    const TokenizedSentence& sentence =
        j < example.positives.size()
            ? example.positives[j]
            : example.negatives[j - example.positives.size()];
    const double inv_len =
        1.0 / static_cast<double>(sentence.token_ids.size());
    for (const uint32_t id : sentence.token_ids) {
      out.accumulate(id, g_candidate, inv_len);
    }
  }

  const double inv_center_len =
      1.0 / static_cast<double>(example.center.token_ids.size());
  for (const uint32_t id : example.center.token_ids) {
    out.accumulate(id, g_center, inv_center_len);
  }
}

SparseGradient backward(const EmbeddingMatrix& matrix,
                        const TrainingExample& example,
                        const ForwardTrace& trace,
                        std::span<const double> target) {
  SparseGradient grad(matrix.dim());
  backward_into(matrix, example, trace, target, grad);
  return grad;
}

double lr_schedule(double initial_lr, uint64_t batches_done,
                   uint64_t total_batches, double floor_fraction) {
  if (total_batches == 0) {
    throw InvalidConfig("learning-rate schedule needs total_batches >= 1");
  }
  if (batches_done > total_batches) {
    throw InvalidConfig("batches_done exceeds total_batches");
  }
  if (floor_fraction < 0.0 || floor_fraction >= 1.0) {
    throw InvalidConfig("floor_fraction must lie in [0, 1)");
  }
  const double progress = static_cast<double>(batches_done) /
                          static_cast<double>(total_batches);
  return initial_lr * std::max(floor_fraction, 1.0 - progress);
}

void sgd_step(EmbeddingMatrix& matrix, const SparseGradient& grad, double lr) {
  if (grad.dim() != matrix.dim()) {
    throw Corrupted("gradient dimensionality does not match the matrix");
  }
  for (const auto& [index, g] : grad.rows()) {
    if (index >= matrix.vocab_size()) {
      throw Corrupted("gradient names row " + std::to_string(index) +
                      " outside the matrix");
    }
    auto row = matrix.row(index);
    for (std::size_t k = 0; k < g.size(); ++k) row[k] -= lr * g[k];
  }
}

void TrainConfig::validate() const {
  if (dim < 1) throw InvalidConfig("dim must be >= 1");
  if (n_negatives < 1) throw InvalidConfig("negatives must be >= 1");
  if (batch_size < 1) throw InvalidConfig("batch size must be >= 1");
  if (!(initial_lr > 0.0)) throw InvalidConfig("learning rate must be > 0");
  if (lr_floor_fraction < 0.0 || lr_floor_fraction >= 1.0) {
    throw InvalidConfig("lr floor fraction must lie in [0, 1)");
  }
}

namespace {

// Deterministic Fisher-Yates; std::shuffle is implementation-defined.
void shuffle_positions(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
}

}  // namespace

TrainResult train(const CorpusIndex& index, const Vocabulary& vocab,
                  const TrainConfig& config, const ProgressSink& progress,
                  const EmbeddingMatrix* resume_matrix,
                  const OptimizerState* resume_state) {
  config.validate();
  if ((resume_matrix == nullptr) != (resume_state == nullptr)) {
    throw InvalidConfig("resume needs both a matrix and an optimizer state");
  }

  const std::vector<Window> windows = iterate_windows(index);
  if (windows.empty()) {
    throw EmptyCorpus("corpus yields no training windows");
  }

  const uint64_t batches_per_epoch =
      (windows.size() + config.batch_size - 1) / config.batch_size;
  const uint64_t total_batches = batches_per_epoch * config.epochs;

  TrainResult result;
  std::size_t start_epoch = 0;
  Rng rng(mix_seed(config.seed, 1));

  if (resume_matrix != nullptr) {
    if (resume_state->total_batches != total_batches) {
      throw InvalidConfig(
          "checkpoint was taken from a run with a different batch plan");
    }
    if (resume_state->batches_done % batches_per_epoch != 0 ||
        resume_state->batches_done > total_batches) {
      throw InvalidConfig("checkpoint is not at an epoch boundary");
    }
    if (resume_matrix->vocab_size() != vocab.size() ||
        resume_matrix->dim() != config.dim) {
      throw InvalidConfig("checkpoint shape does not match corpus and config");
    }
    result.matrix = *resume_matrix;
    result.state.batches_done = resume_state->batches_done;
    start_epoch = resume_state->batches_done / batches_per_epoch;
    rng = Rng::deserialize(resume_state->rng_state);
  } else {
    result.matrix = init_embeddings(vocab.size(), config.dim, config.seed);
  }
  result.state.total_batches = total_batches;
  result.state.seed = config.seed;

  TrainingMetrics& metrics = result.metrics;
  uint64_t& batches_done = result.state.batches_done;

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);

  double interval_loss = 0.0;
  uint64_t interval_examples = 0;
  uint64_t last_emitted = 0;
  const auto loop_start = std::chrono::steady_clock::now();
  auto interval_start = loop_start;

  const auto emit = [&](std::size_t epoch) {
    if (!progress) return;
    const auto now = std::chrono::steady_clock::now();
    const double seconds =
        std::chrono::duration<double>(now - interval_start).count();
    ProgressEvent event;
    event.examples_done = metrics.examples_seen;
    event.batches_done = batches_done;
    event.epoch = epoch;
    event.interval_mean_loss =
        interval_examples > 0 ? interval_loss / interval_examples : 0.0;
    event.examples_per_sec =
        seconds > 0.0 ? interval_examples / seconds : 0.0;
    event.skipped_examples = metrics.skipped_examples;
    progress(event);
    interval_loss = 0.0;
    interval_examples = 0;
    last_emitted = metrics.examples_seen;
    interval_start = now;
  };

  for (std::size_t epoch = start_epoch; epoch < config.epochs; ++epoch) {
    // reshuffle from identity so the permutation is a pure function of the
    // generator state; a resumed epoch then shuffles exactly as the
    // uninterrupted run would
    std::iota(order.begin(), order.end(), 0);
    shuffle_positions(order, rng);
    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size) {
      const std::size_t end =
          std::min(begin + config.batch_size, order.size());

      SparseGradient batch_grad(config.dim);
      double batch_loss = 0.0;
      std::size_t contributing = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const TrainingExample example = make_example(
            index, windows[order[i]], config.n_negatives, rng);
        ++metrics.examples_seen;
        try {
          const ForwardTrace trace = forward(result.matrix, example);
          const auto target = target_distribution(example.positives.size(),
                                                  example.negatives.size());
          batch_loss += loss(trace, target);
          backward_into(result.matrix, example, trace, target, batch_grad);
          ++contributing;
        } catch (const ZeroVector&) {
          ++metrics.skipped_examples;
        }
      }

      if (contributing > 0) {
        batch_grad.scale(1.0 / static_cast<double>(contributing));
        const double lr = lr_schedule(config.initial_lr, batches_done,
                                      total_batches,
                                      config.lr_floor_fraction);
        sgd_step(result.matrix, batch_grad, lr);
        const double mean_loss = batch_loss / contributing;
        metrics.batch_losses.push_back(mean_loss);
        interval_loss += mean_loss * contributing;
        interval_examples += contributing;
      }
      ++batches_done;

      if (config.progress_every > 0 &&
          metrics.examples_seen - last_emitted >= config.progress_every) {
        emit(epoch);
      }
    }
    emit(epoch);
    if (config.stop_after_epochs > 0 &&
        epoch + 1 >= config.stop_after_epochs) {
      break;
    }
  }

  metrics.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - loop_start)
                             .count();
  result.state.rng_state = rng.serialize();
  return result;
}

}  // namespace scbow
