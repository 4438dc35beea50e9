#include "scbow/analysis.hpp"

#include <algorithm>
#include <chrono>

#include "scbow/errors.hpp"

namespace scbow {

std::pair<NormRanking, NormRanking> norm_ranking(const EmbeddingMatrix& matrix,
                                                 const Vocabulary& vocab,
                                                 std::size_t k) {
  if (k > vocab.size()) {
    throw InvalidConfig("norm ranking asked for more tokens than exist");
  }

  std::vector<std::pair<std::string, double>> all;
  all.reserve(vocab.size());
  for (uint32_t id = 0; id < vocab.size(); ++id) {
    all.emplace_back(vocab.token(id), norm(matrix.row(id)));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });

  NormRanking lowest;
  lowest.entries.assign(all.begin(), all.begin() + k);
  NormRanking highest;
  highest.entries.assign(all.rbegin(), all.rbegin() + k);
  return {std::move(lowest), std::move(highest)};
}

std::vector<std::pair<std::string, double>> nearest_neighbors(
    const EmbeddingMatrix& matrix, const Vocabulary& vocab,
    std::string_view query, double threshold) {
  const std::optional<uint32_t> query_id = vocab.lookup(query);
  if (!query_id.has_value()) {
    throw UnknownToken("query token '" + std::string(query) +
                       "' is not in the vocabulary");
  }
  const auto query_row = matrix.row(*query_id);
  const double query_norm = norm(query_row);
  if (query_norm == 0.0) {
    throw ZeroVector("query token has a zero-norm embedding");
  }

  std::vector<std::pair<std::string, double>> neighbors;
  for (uint32_t id = 0; id < vocab.size(); ++id) {
    if (id == *query_id) continue;
    const auto row = matrix.row(id);
    const double n = norm(row);
    if (n == 0.0) continue;
    const double cos =
        std::clamp(dot(query_row, row) / (query_norm * n), -1.0, 1.0);
    if (cos >= threshold) neighbors.emplace_back(vocab.token(id), cos);
  }
  std::sort(neighbors.begin(), neighbors.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return neighbors;
}

OpCount count_inference_ops(std::size_t sentence_length) {
  if (sentence_length == 0) {
    throw EmptySentence("cannot average an empty sentence");
  }
  OpCount ops;
  ops.tokens = sentence_length;
  ops.vector_additions = sentence_length - 1;
  ops.scalar_multiplications = 1;
  return ops;
}

std::vector<double> instrumented_average(const EmbeddingMatrix& matrix,
                                         const TokenizedSentence& sentence,
                                         OpCount& ops) {
  if (sentence.empty()) {
    throw EmptySentence("cannot average an empty sentence");
  }
  ops = OpCount{};
  ops.tokens = sentence.token_ids.size();

  const std::size_t d = matrix.dim();
  const auto first = matrix.row(sentence.token_ids[0]);
  std::vector<double> acc(first.begin(), first.end());
  for (std::size_t t = 1; t < sentence.token_ids.size(); ++t) {
    const auto row = matrix.row(sentence.token_ids[t]);
    for (std::size_t k = 0; k < d; ++k) acc[k] += row[k];
    ++ops.vector_additions;
  }
  const double inv = 1.0 / static_cast<double>(sentence.token_ids.size());
  for (std::size_t k = 0; k < d; ++k) acc[k] *= inv;
  ++ops.scalar_multiplications;
  return acc;
}

BenchmarkReport benchmark_pairs(const EmbeddingMatrix& matrix,
                                const Vocabulary& vocab,
                                const std::vector<SentencePair>& pairs) {
  BenchmarkReport report;
  report.n_pairs = pairs.size();

  const auto start = std::chrono::steady_clock::now();
  for (const SentencePair& pair : pairs) {
    if (pair_similarity(matrix, vocab, pair).has_value()) ++report.n_scored;
  }
  const auto stop = std::chrono::steady_clock::now();

  report.total_seconds = std::chrono::duration<double>(stop - start).count();
  report.seconds_per_pair =
      pairs.empty() ? 0.0 : report.total_seconds / pairs.size();
  return report;
}

}  // namespace scbow
