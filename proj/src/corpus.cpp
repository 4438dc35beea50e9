#include "scbow/corpus.hpp"

#include <algorithm>
#include <fstream>

#include "scbow/errors.hpp"
#include "scbow/text.hpp"

namespace scbow {

Vocabulary::Vocabulary(std::vector<std::pair<std::string, uint64_t>> entries,
                       uint32_t min_count)
    : min_count_(min_count) {
  id_to_token_.reserve(entries.size());
  counts_.reserve(entries.size());
  token_to_id_.reserve(entries.size());
  for (auto& [token, count] : entries) {
    if (count < min_count) {
      throw Corrupted("vocabulary entry '" + token +
                      "' falls below the frequency threshold");
    }
    const auto id = static_cast<uint32_t>(id_to_token_.size());
    if (!token_to_id_.emplace(token, id).second) {
      throw Corrupted("duplicate vocabulary token '" + token + "'");
    }
    id_to_token_.push_back(std::move(token));
    counts_.push_back(count);
  }
}

std::optional<uint32_t> Vocabulary::lookup(std::string_view token) const {
  // transparent lookup without constructing a string would need a custom
  // hash; vocab lookups are not the hot path, so keep the plain map
  const auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

namespace {

void count_tokens(std::istream& in,
                  std::unordered_map<std::string, uint64_t>& counts) {
  std::string line;
  while (std::getline(in, line)) {
    for (auto& token : tokenize(line)) {
      ++counts[std::move(token)];
    }
  }
}

Vocabulary finish_vocabulary(std::unordered_map<std::string, uint64_t> counts,
                             uint32_t min_count) {
  std::vector<std::pair<std::string, uint64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [token, count] : counts) {
    if (count >= min_count) {
      kept.emplace_back(token, count);
    }
  }
  if (kept.empty()) {
    throw EmptyCorpus("no token appears " + std::to_string(min_count) +
                      " times or more");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return Vocabulary(std::move(kept), min_count);
}

}  // namespace

Vocabulary build_vocabulary(std::istream& sentence_stream,
                            uint32_t min_count) {
  std::unordered_map<std::string, uint64_t> counts;
  count_tokens(sentence_stream, counts);
  return finish_vocabulary(std::move(counts), min_count);
}

Vocabulary build_vocabulary(const std::filesystem::path& path,
                            uint32_t min_count) {
  namespace fs = std::filesystem;
  std::unordered_map<std::string, uint64_t> counts;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::ifstream in(file);
      if (!in) throw IoError("cannot open corpus file: " + file.string());
      count_tokens(in, counts);
    }
  } else {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path.string());
    count_tokens(in, counts);
  }
  return finish_vocabulary(std::move(counts), min_count);
}

TokenizedSentence encode_sentence(const Vocabulary& vocab,
                                  std::string_view raw) {
  TokenizedSentence sentence;
  for (const auto& token : tokenize(raw)) {
    if (const auto id = vocab.lookup(token)) {
      sentence.token_ids.push_back(*id);
    }
  }
  return sentence;
}

CorpusIndex::CorpusIndex(std::vector<std::vector<TokenizedSentence>> documents) {
  doc_offsets_.push_back(0);
  for (std::size_t doc = 0; doc < documents.size(); ++doc) {
    for (std::size_t i = 0; i < documents[doc].size(); ++i) {
      TokenizedSentence sentence = std::move(documents[doc][i]);
      sentence.source.document = static_cast<uint32_t>(doc);
      sentence.source.sentence = static_cast<uint32_t>(i);
      if (!sentence.empty()) {
        nonempty_.push_back(sentences_.size());
      }
      sentences_.push_back(std::move(sentence));
    }
    doc_offsets_.push_back(sentences_.size());
  }
}

CorpusIndex CorpusIndex::from_stream(std::istream& in,
                                     const Vocabulary& vocab) {
  std::vector<std::vector<TokenizedSentence>> documents;
  std::vector<TokenizedSentence> current;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool blank = line.find_first_not_of(" \t") == std::string::npos;
    if (blank) {
      if (!current.empty()) {
        documents.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    current.push_back(encode_sentence(vocab, line));
  }
  if (!current.empty()) {
    documents.push_back(std::move(current));
  }
  return CorpusIndex(std::move(documents));
}

CorpusIndex CorpusIndex::from_path(const std::filesystem::path& path,
                                   const Vocabulary& vocab) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::vector<TokenizedSentence>> documents;
    for (const auto& file : files) {
      std::ifstream in(file);
      if (!in) throw IoError("cannot open corpus file: " + file.string());
      // each file is one document: inner blank lines are ignored as
      // separators here would split what the caller declared to be one book
      std::vector<TokenizedSentence> doc;
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        doc.push_back(encode_sentence(vocab, line));
      }
      if (!doc.empty()) documents.push_back(std::move(doc));
    }
    return CorpusIndex(std::move(documents));
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  return from_stream(in, vocab);
}

std::vector<std::size_t> CorpusIndex::neighbors(std::size_t pos) const {
  const auto [begin, end] = document_range(sentences_[pos].source.document);
  std::vector<std::size_t> result;
  if (pos > begin) result.push_back(pos - 1);
  if (pos + 1 < end) result.push_back(pos + 1);
  return result;
}

std::vector<Window> iterate_windows(const CorpusIndex& index) {
  std::vector<Window> windows;
  for (const std::size_t pos : index.nonempty_positions()) {
    Window window;
    window.center = pos;
    for (const std::size_t neighbor : index.neighbors(pos)) {
      if (!index.sentence(neighbor).empty()) {
        window.positives.push_back(neighbor);
      }
    }
    if (!window.positives.empty()) {
      windows.push_back(std::move(window));
    }
  }
  return windows;
}

std::vector<std::size_t> sample_negatives(const CorpusIndex& index,
                                          std::size_t center_pos,
                                          std::size_t n, Rng& rng) {
  const auto& candidates = index.nonempty_positions();
  if (candidates.size() < n + 3) {
    throw InsufficientCorpus(
        "negative sampling needs at least " + std::to_string(n + 3) +
        " non-empty sentences, corpus has " +
        std::to_string(candidates.size()));
  }
  const auto excluded_neighbors = index.neighbors(center_pos);
  const auto excluded = [&](std::size_t pos) {
    if (pos == center_pos) return true;
    return std::find(excluded_neighbors.begin(), excluded_neighbors.end(),
                     pos) != excluded_neighbors.end();
  };

  std::vector<std::size_t> negatives;
  negatives.reserve(n);
  while (negatives.size() < n) {
    const std::size_t pos = candidates[rng.uniform_index(candidates.size())];
    if (!excluded(pos)) {
      negatives.push_back(pos);
    }
  }
  return negatives;
}

TrainingExample make_example(const CorpusIndex& index, const Window& window,
                             std::size_t n_negatives, Rng& rng) {
  TrainingExample example;
  example.center = index.sentence(window.center);
  example.center_pos = window.center;
  example.positive_pos = window.positives;
  for (const std::size_t pos : window.positives) {
    example.positives.push_back(index.sentence(pos));
  }
  example.negative_pos =
      sample_negatives(index, window.center, n_negatives, rng);
  for (const std::size_t pos : example.negative_pos) {
    example.negatives.push_back(index.sentence(pos));
  }
  return example;
}

}  // namespace scbow
