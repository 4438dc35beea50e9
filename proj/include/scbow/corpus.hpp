#ifndef SCBOW_CORPUS_HPP_
#define SCBOW_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scbow/rng.hpp"

namespace scbow {

// Token <-> dense index map with corpus frequencies. Indices are assigned in
// descending frequency order, ties broken lexicographically, so the layout
// is a pure function of the corpus contents and the threshold.
class Vocabulary {
 public:
  Vocabulary() = default;

  // entries must already be in final id order. Counts below min_count are
  // rejected, as are duplicate tokens.
  Vocabulary(std::vector<std::pair<std::string, uint64_t>> entries,
             uint32_t min_count);

  std::size_t size() const { return id_to_token_.size(); }
  std::optional<uint32_t> lookup(std::string_view token) const;
  const std::string& token(uint32_t id) const { return id_to_token_[id]; }
  uint64_t count(uint32_t id) const { return counts_[id]; }
  uint32_t min_count() const { return min_count_; }

 private:
  std::unordered_map<std::string, uint32_t> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::vector<uint64_t> counts_;
  uint32_t min_count_ = 0;
};

// One pass over the stream (one sentence per line), then threshold and sort.
// Throws EmptyCorpus when no token survives the threshold.
Vocabulary build_vocabulary(std::istream& sentence_stream, uint32_t min_count);

// Same, for a corpus file or a directory of corpus files.
Vocabulary build_vocabulary(const std::filesystem::path& path,
                            uint32_t min_count);

struct SourcePosition {
  uint32_t document = 0;
  uint32_t sentence = 0;  // index within the document
};

struct TokenizedSentence {
  std::vector<uint32_t> token_ids;  // OOV tokens already removed
  SourcePosition source;

  bool empty() const { return token_ids.empty(); }
};

// Tokenizes and drops out-of-vocabulary tokens; surviving order matches the
// surface order. An empty result is a legal value.
TokenizedSentence encode_sentence(const Vocabulary& vocab,
                                  std::string_view raw);

// Sentences in document order plus document boundaries. Adjacency queries
// never cross a boundary. Immutable after construction.
class CorpusIndex {
 public:
  CorpusIndex() = default;
  explicit CorpusIndex(std::vector<std::vector<TokenizedSentence>> documents);

  // Blank lines separate documents within a stream.
  static CorpusIndex from_stream(std::istream& in, const Vocabulary& vocab);
  // A directory is read as one document per file (sorted by name);
  // a single file may still hold several blank-line-separated documents.
  static CorpusIndex from_path(const std::filesystem::path& path,
                               const Vocabulary& vocab);

  std::size_t size() const { return sentences_.size(); }
  const TokenizedSentence& sentence(std::size_t pos) const {
    return sentences_[pos];
  }
  std::size_t document_count() const { return doc_offsets_.size() - 1; }
  std::pair<std::size_t, std::size_t> document_range(std::size_t doc) const {
    return {doc_offsets_[doc], doc_offsets_[doc + 1]};
  }

  // In-document adjacent positions (preceding, following), empty or not.
  std::vector<std::size_t> neighbors(std::size_t pos) const;

  const std::vector<std::size_t>& nonempty_positions() const {
    return nonempty_;
  }

 private:
  std::vector<TokenizedSentence> sentences_;
  std::vector<std::size_t> doc_offsets_;  // size document_count()+1
  std::vector<std::size_t> nonempty_;
};

// A center position with the adjacent positions usable as positives.
struct Window {
  std::size_t center = 0;
  std::vector<std::size_t> positives;  // 1 at a document edge, else 2
};

// One window per non-empty sentence that has at least one non-empty
// in-document neighbor, in document order.
std::vector<Window> iterate_windows(const CorpusIndex& index);

// n positions drawn uniformly (with replacement across draws, rejection
// within a draw) from all non-empty sentences excluding the center and its
// in-document neighbors. Requires at least n+3 non-empty sentences.
std::vector<std::size_t> sample_negatives(const CorpusIndex& index,
                                          std::size_t center_pos,
                                          std::size_t n, Rng& rng);

// One center sentence with its adjacent positives and sampled negatives.
// Exclusion is positional: a negative may be textually identical to a
// positive drawn from elsewhere in the corpus.
struct TrainingExample {
  TokenizedSentence center;
  std::vector<TokenizedSentence> positives;
  std::vector<TokenizedSentence> negatives;
  std::size_t center_pos = 0;
  std::vector<std::size_t> positive_pos;
  std::vector<std::size_t> negative_pos;
};

TrainingExample make_example(const CorpusIndex& index, const Window& window,
                             std::size_t n_negatives, Rng& rng);

}  // namespace scbow

#endif  // SCBOW_CORPUS_HPP_
