#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scbow/corpus.hpp"
#include "scbow/eval.hpp"
#include "scbow/model.hpp"

namespace scbow {

struct NormRanking {
  std::vector<std::pair<std::string, double>> entries;
};

// k-smallest and k-largest rows by L2 norm. The lowest list ascends, the
// highest descends; ties break lexicographically on the token.
std::pair<NormRanking, NormRanking> norm_ranking(const EmbeddingMatrix& matrix,
                                                 const Vocabulary& vocab,
                                                 std::size_t k);

// Exhaustive scan: every other token whose cosine against the query row
// reaches the threshold, sorted by descending cosine.
std::vector<std::pair<std::string, double>> nearest_neighbors(
    const EmbeddingMatrix& matrix, const Vocabulary& vocab,
    std::string_view query, double threshold);

struct OpCount {
  std::size_t vector_additions = 0;
  std::size_t scalar_multiplications = 0;
  std::size_t tokens = 0;
};

// Arithmetic cost of averaging a |T|-token sentence into one vector.
OpCount count_inference_ops(std::size_t sentence_length);

// Same arithmetic as average_embedding, with the operations tallied as they
// happen. Exists to pin count_inference_ops to the real implementation.
std::vector<double> instrumented_average(const EmbeddingMatrix& matrix,
                                         const TokenizedSentence& sentence,
                                         OpCount& ops);

struct BenchmarkReport {
  std::size_t n_pairs = 0;
  std::size_t n_scored = 0;
  double total_seconds = 0.0;
  double seconds_per_pair = 0.0;
};

// Single-threaded, one pair at a time, embedding plus cosine only; the
// caller loads the model beforehand so load time never enters the clock.
BenchmarkReport benchmark_pairs(const EmbeddingMatrix& matrix,
                                const Vocabulary& vocab,
                                const std::vector<SentencePair>& pairs);

}  // namespace scbow
