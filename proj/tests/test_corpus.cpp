#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "scbow/corpus.hpp"
#include "scbow/errors.hpp"

using namespace scbow;

namespace {

Vocabulary tiny_vocab() {
  std::istringstream corpus(
      "the cat sat\n"
      "the dog sat\n"
      "the cat ran\n");
  return build_vocabulary(corpus, 2);
}

}  // namespace

TEST_CASE("vocabulary orders by frequency, ties lexicographic") {
  std::istringstream corpus("b a c a b a\nc b\n");
  const Vocabulary vocab = build_vocabulary(corpus, 1);
  // counts: a=3, b=3, c=2
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.token(0) == "a");
  CHECK(vocab.token(1) == "b");
  CHECK(vocab.token(2) == "c");
  CHECK(vocab.count(0) == 3);
  CHECK(vocab.count(2) == 2);
  CHECK(vocab.lookup("b") == 1);
  CHECK_FALSE(vocab.lookup("z").has_value());
}

TEST_CASE("min_count filters rare tokens") {
  const Vocabulary vocab = tiny_vocab();
  // the=3, sat=2, cat=2; dog/ran appear once
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.token(0) == "the");
  CHECK(vocab.token(1) == "cat");
  CHECK(vocab.token(2) == "sat");
  CHECK_FALSE(vocab.lookup("dog").has_value());
}

TEST_CASE("empty surviving vocabulary raises") {
  std::istringstream corpus("a b c\n");
  CHECK_THROWS_AS(build_vocabulary(corpus, 5), EmptyCorpus);
}

TEST_CASE("encode drops out-of-vocabulary tokens") {
  const Vocabulary vocab = tiny_vocab();
  const TokenizedSentence s = encode_sentence(vocab, "The DOG sat!");
  REQUIRE(s.token_ids.size() == 2);
  CHECK(s.token_ids[0] == vocab.lookup("the"));
  CHECK(s.token_ids[1] == vocab.lookup("sat"));
  CHECK(encode_sentence(vocab, "dog ran").empty());
}

TEST_CASE("blank lines split documents") {
  const Vocabulary vocab = tiny_vocab();
  std::istringstream stream(
      "the cat\nthe sat\n\nthe cat sat\nthe the\n \t \nthe sat cat\n");
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);
  CHECK(index.document_count() == 3);
  CHECK(index.size() == 5);
  CHECK(index.sentence(0).source.document == 0);
  CHECK(index.sentence(2).source.document == 1);
  CHECK(index.sentence(2).source.sentence == 0);
  CHECK(index.sentence(4).source.document == 2);
}

TEST_CASE("neighbors stay inside the document") {
  const Vocabulary vocab = tiny_vocab();
  std::istringstream stream("the cat\nthe sat\nthe the\n\nthe cat sat\n");
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);
  CHECK(index.neighbors(0) == std::vector<std::size_t>{1});
  CHECK(index.neighbors(1) == std::vector<std::size_t>{0, 2});
  CHECK(index.neighbors(2) == std::vector<std::size_t>{1});
  CHECK(index.neighbors(3).empty());  // lone sentence in its document
}

TEST_CASE("windows require a non-empty center and neighbor") {
  const Vocabulary vocab = tiny_vocab();
  // middle sentence is all-OOV, so it encodes to empty
  std::istringstream stream("the cat\ndog ran\nthe sat\n");
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);
  REQUIRE(index.size() == 3);
  CHECK(index.sentence(1).empty());

  const std::vector<Window> windows = iterate_windows(index);
  // sentences 0 and 2 have only the empty sentence 1 as neighbor
  CHECK(windows.empty());
}

TEST_CASE("window positives are the adjacent non-empty sentences") {
  const Vocabulary vocab = tiny_vocab();
  std::istringstream stream("the cat\nthe sat\nthe the\n");
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);
  const std::vector<Window> windows = iterate_windows(index);
  REQUIRE(windows.size() == 3);
  CHECK(windows[0].center == 0);
  CHECK(windows[0].positives == std::vector<std::size_t>{1});
  CHECK(windows[1].center == 1);
  CHECK(windows[1].positives == std::vector<std::size_t>{0, 2});
  CHECK(windows[2].center == 2);
  CHECK(windows[2].positives == std::vector<std::size_t>{1});
}

TEST_CASE("single-sentence documents yield no windows") {
  const Vocabulary vocab = tiny_vocab();
  std::istringstream stream("the cat\n\nthe sat\n\nthe the\n");
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);
  CHECK(iterate_windows(index).empty());
}

TEST_CASE("negative sampling needs enough non-empty sentences") {
  const Vocabulary vocab = tiny_vocab();
  std::istringstream stream("the cat\nthe sat\nthe the\nthe cat sat\n");
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);
  Rng rng(1);
  // 4 non-empty sentences, 2 negatives requested, needs at least 5
  CHECK_THROWS_AS(sample_negatives(index, 1, 2, rng), InsufficientCorpus);
}

TEST_CASE("negatives exclude the center and its neighbors") {
  const Vocabulary vocab = tiny_vocab();
  std::ostringstream text;
  for (int i = 0; i < 12; ++i) text << "the cat sat\n";
  std::istringstream stream(text.str());
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);

  Rng rng(9);
  const std::size_t center = 5;
  for (int trial = 0; trial < 10000; ++trial) {
    for (const std::size_t pos : sample_negatives(index, center, 2, rng)) {
      CHECK(pos < index.size());
      CHECK(pos != center);
      CHECK(pos != center - 1);
      CHECK(pos != center + 1);
      CHECK_FALSE(index.sentence(pos).empty());
    }
  }
}

TEST_CASE("negatives sample with replacement") {
  const Vocabulary vocab = tiny_vocab();
  // 6 non-empty sentences; for center 2 only positions 0, 4, 5 are
  // eligible, so 3 draws repeat a position in most trials
  std::ostringstream text;
  for (int i = 0; i < 6; ++i) text << "the cat sat\n";
  std::istringstream stream(text.str());
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);

  Rng rng(3);
  int trials_with_repeat = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<std::size_t> negatives =
        sample_negatives(index, 2, 3, rng);
    REQUIRE(negatives.size() == 3);
    for (const std::size_t pos : negatives) {
      CHECK((pos == 0 || pos == 4 || pos == 5));
    }
    const std::set<std::size_t> unique(negatives.begin(), negatives.end());
    if (unique.size() < negatives.size()) ++trials_with_repeat;
  }
  CHECK(trials_with_repeat > 0);
}

TEST_CASE("negative sampling is deterministic per seed") {
  const Vocabulary vocab = tiny_vocab();
  std::ostringstream text;
  for (int i = 0; i < 30; ++i) text << "the cat sat\n";
  const std::string corpus = text.str();

  const auto draw = [&](uint64_t seed) {
    std::istringstream stream(corpus);
    const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);
    Rng rng(seed);
    std::vector<std::size_t> all;
    for (int i = 0; i < 50; ++i) {
      for (const std::size_t pos : sample_negatives(index, 10, 2, rng)) {
        all.push_back(pos);
      }
    }
    return all;
  };
  CHECK(draw(42) == draw(42));
  CHECK(draw(42) != draw(43));
}

TEST_CASE("make_example resolves positions to sentences") {
  const Vocabulary vocab = tiny_vocab();
  std::ostringstream text;
  for (int i = 0; i < 10; ++i) text << "the cat sat\n";
  std::istringstream stream(text.str());
  const CorpusIndex index = CorpusIndex::from_stream(stream, vocab);

  const std::vector<Window> windows = iterate_windows(index);
  Rng rng(4);
  const TrainingExample example = make_example(index, windows[4], 2, rng);
  CHECK(example.center_pos == 4);
  CHECK(example.positive_pos == std::vector<std::size_t>{3, 5});
  REQUIRE(example.positives.size() == 2);
  REQUIRE(example.negatives.size() == 2);
  CHECK(example.center.token_ids == index.sentence(4).token_ids);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(example.negatives[j].token_ids ==
          index.sentence(example.negative_pos[j]).token_ids);
  }
}

TEST_CASE("directory corpora read one document per file, sorted") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scbow_corpus_dir_test";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "b.txt") << "the cat\nthe sat\n";
    std::ofstream(dir / "a.txt") << "the the\n\nthe cat sat\n";
  }

  const Vocabulary vocab = build_vocabulary(dir, 2);
  const CorpusIndex index = CorpusIndex::from_path(dir, vocab);
  // a.txt first (sorted), and its inner blank line does NOT split it
  CHECK(index.document_count() == 2);
  CHECK(index.sentence(0).source.document == 0);
  CHECK(index.sentence(1).source.document == 0);
  CHECK(index.sentence(2).source.document == 1);
  fs::remove_all(dir);
}
