#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scbow/corpus.hpp"
#include "scbow/model.hpp"

namespace scbow {

struct SentencePair {
  std::string left;
  std::string right;
  std::optional<double> gold;
};

// Tab-separated, one pair per non-blank line: left TAB right [TAB gold].
std::vector<SentencePair> load_pairs(std::istream& in);
std::vector<SentencePair> load_pairs(const std::filesystem::path& path);

// Cosine of the two averaged sentence embeddings after dropping
// out-of-vocabulary tokens. Empty when either side has no in-vocabulary
// tokens left or averages to a zero-norm vector; such pairs are skipped,
// not scored.
std::optional<double> pair_similarity(const EmbeddingMatrix& matrix,
                                      const Vocabulary& vocab,
                                      const SentencePair& pair);

double pearson(std::span<const double> xs, std::span<const double> ys);

// 1-based ranks; ties share the mean of their rank span.
std::vector<double> average_ranks(std::span<const double> values);

double spearman(std::span<const double> xs, std::span<const double> ys);

struct EvalReport {
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_skipped = 0;
  std::vector<std::pair<double, double>> per_pair_scores;  // (system, gold)
};

std::vector<std::optional<double>> score_pairs(
    const EmbeddingMatrix& matrix, const Vocabulary& vocab,
    const std::vector<SentencePair>& pairs);

EvalReport evaluate(const EmbeddingMatrix& matrix, const Vocabulary& vocab,
                    const std::vector<SentencePair>& pairs);

struct SignificanceResult {
  double statistic = 0.0;   // W = min(W+, W-) over nonzero differences
  std::size_t n_effective = 0;
  double p_value = 1.0;
  bool significant = false;  // p < 0.0001
};

// Paired two-sided test. Exact enumeration for n_effective <= 25, normal
// approximation with tie and continuity corrections above.
SignificanceResult wilcoxon_signed_rank(std::span<const double> a,
                                        std::span<const double> b);

}  // namespace scbow
