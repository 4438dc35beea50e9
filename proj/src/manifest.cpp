#include "scbow/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <fstream>
#include <sstream>
#include <vector>

#include "scbow/errors.hpp"

namespace scbow {

std::string_view version() { return "0.1.0"; }

uint64_t fnv1a64(std::string_view bytes, uint64_t seed_hash) {
  uint64_t hash = seed_hash;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

uint64_t digest_file(const std::filesystem::path& path, uint64_t hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char buffer[1 << 16];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    hash = fnv1a64(
        std::string_view(buffer, static_cast<std::size_t>(in.gcount())),
        hash);
  }
  return hash;
}

std::string format_number(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace

uint64_t digest_corpus(const std::filesystem::path& path) {
  uint64_t hash = fnv1a64("");
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      hash = fnv1a64(file.filename().string(), hash);
      hash = fnv1a64(std::string_view("\n", 1), hash);
      hash = digest_file(file, hash);
      hash = fnv1a64(std::string_view("\0", 1), hash);
    }
    return hash;
  }
  return digest_file(path, hash);
}

std::string render_manifest(const RunManifest& manifest) {
  std::ostringstream out;
  out << "tool = scbow " << version() << '\n';
  out << "command = " << manifest.command << '\n';
  out << "started_at = " << manifest.started_at << '\n';
  out << "corpus = " << manifest.corpus.string() << '\n';

  char digest[17];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(manifest.corpus_digest));
  out << "corpus_digest = fnv1a64:" << digest << '\n';

  const TrainConfig& c = manifest.config;
  out << "dim = " << c.dim << '\n';
  out << "negatives = " << c.n_negatives << '\n';
  out << "batch_size = " << c.batch_size << '\n';
  out << "learning_rate = " << format_number(c.initial_lr) << '\n';
  out << "lr_floor_fraction = " << format_number(c.lr_floor_fraction) << '\n';
  out << "epochs = " << c.epochs << '\n';
  out << "min_count = " << c.min_count << '\n';
  out << "seed = " << c.seed << '\n';

  out << "vocab_size = " << manifest.vocab_size << '\n';
  out << "total_batches = " << manifest.total_batches << '\n';
  out << "examples_seen = " << manifest.examples_seen << '\n';
  out << "skipped_examples = " << manifest.skipped_examples << '\n';
  out << "wall_seconds = " << format_number(manifest.wall_seconds) << '\n';
  out << "output = " << manifest.output.string() << '\n';
  return out.str();
}

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << render_manifest(manifest);
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

}  // namespace scbow
