#include "scbow/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "scbow/errors.hpp"

namespace scbow {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t tab = line.find('\t', begin);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
}

double parse_gold(const std::string& field, std::size_t line_no) {
  std::size_t first = field.find_first_not_of(' ');
  std::size_t last = field.find_last_not_of(' ');
  if (first == std::string::npos) {
    throw ParseError("empty gold score field", line_no);
  }
  const char* begin = field.data() + first;
  const char* end = field.data() + last + 1;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError("cannot parse gold score '" + field + "'", line_no);
  }
  return value;
}

}  // namespace

std::vector<SentencePair> load_pairs(std::istream& in) {
  std::vector<SentencePair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError("expected 2 or 3 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    SentencePair pair;
    pair.left = fields[0];
    pair.right = fields[1];
    if (fields.size() == 3) pair.gold = parse_gold(fields[2], line_no);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<SentencePair> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  return load_pairs(in);
}

std::optional<double> pair_similarity(const EmbeddingMatrix& matrix,
                                      const Vocabulary& vocab,
                                      const SentencePair& pair) {
  const TokenizedSentence left = encode_sentence(vocab, pair.left);
  const TokenizedSentence right = encode_sentence(vocab, pair.right);
  if (left.empty() || right.empty()) return std::nullopt;

  const std::vector<double> lhs = average_embedding(matrix, left);
  const std::vector<double> rhs = average_embedding(matrix, right);
  const double ln = norm(lhs);
  const double rn = norm(rhs);
  if (ln == 0.0 || rn == 0.0) return std::nullopt;
  return std::clamp(dot(lhs, rhs) / (ln * rn), -1.0, 1.0);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidExample("correlation needs equally long lists");
  }
  const std::size_t n = xs.size();
  if (n < 2) throw DegenerateInput("correlation needs at least two points");

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DegenerateInput("correlation is undefined for constant data");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + 1) + (j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidExample("correlation needs equally long lists");
  }
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  return pearson(rx, ry);
}

std::vector<std::optional<double>> score_pairs(
    const EmbeddingMatrix& matrix, const Vocabulary& vocab,
    const std::vector<SentencePair>& pairs) {
  std::vector<std::optional<double>> scores;
  scores.reserve(pairs.size());
  for (const SentencePair& pair : pairs) {
    scores.push_back(pair_similarity(matrix, vocab, pair));
  }
  return scores;
}

EvalReport evaluate(const EmbeddingMatrix& matrix, const Vocabulary& vocab,
                    const std::vector<SentencePair>& pairs) {
  EvalReport report;
  for (const SentencePair& pair : pairs) {
    const std::optional<double> score = pair_similarity(matrix, vocab, pair);
    if (!score.has_value() || !pair.gold.has_value()) {
      ++report.n_skipped;
      continue;
    }
    ++report.n_scored;
    report.per_pair_scores.emplace_back(*score, *pair.gold);
  }
  if (report.n_scored < 2) {
    throw DegenerateInput("fewer than two scorable pairs in the dataset");
  }

  std::vector<double> system(report.n_scored);
  std::vector<double> gold(report.n_scored);
  for (std::size_t i = 0; i < report.per_pair_scores.size(); ++i) {
    system[i] = report.per_pair_scores[i].first;
    gold[i] = report.per_pair_scores[i].second;
  }
  report.pearson = pearson(system, gold);
  report.spearman = spearman(system, gold);
  return report;
}

SignificanceResult wilcoxon_signed_rank(std::span<const double> a,
                                        std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidExample("paired test needs equally long lists");
  }
  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) {
    throw DegenerateInput("all paired differences are zero");
  }

  const std::size_t n = diffs.size();
  std::vector<double> abs_d(n);
  for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::fabs(diffs[i]);
  const std::vector<double> ranks = average_ranks(abs_d);

  double w_plus = 0.0;
  double w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (diffs[i] > 0.0 ? w_plus : w_minus) += ranks[i];
  }
  const double w = std::min(w_plus, w_minus);

  SignificanceResult result;
  result.statistic = w;
  result.n_effective = n;

  if (n <= 25) {
    // Average ranks are multiples of 1/2, so doubled ranks are integers and
    // the rank-sum distribution can be enumerated exactly by convolution.
    const std::size_t sum_doubled = n * (n + 1);
    std::vector<double> counts(sum_doubled + 1, 0.0);
    counts[0] = 1.0;
    for (const double rank : ranks) {
      const auto rd = static_cast<std::size_t>(std::llround(2.0 * rank));
      for (std::size_t s = sum_doubled; s >= rd; --s) {
        counts[s] += counts[s - rd];
      }
    }
    const auto wd = static_cast<std::size_t>(std::llround(2.0 * w));
    double favorable = 0.0;
    for (std::size_t s = 0; s <= sum_doubled; ++s) {
      if (s <= wd || s + wd >= sum_doubled) favorable += counts[s];
    }
    result.p_value = std::min(1.0, favorable / std::ldexp(1.0, n));
  } else {
    const auto nd = static_cast<double>(n);
    const double mu = nd * (nd + 1.0) / 4.0;

    double tie_term = 0.0;
    std::vector<double> sorted(abs_d);
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
      const auto t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }

    const double variance =
        nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    if (!(variance > 0.0)) {
      throw DegenerateInput("signed-rank variance collapsed to zero");
    }
    const double z = (w - mu + 0.5) / std::sqrt(variance);
    result.p_value = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
  }

  result.significant = result.p_value < 0.0001;
  return result;
}

}  // namespace scbow
