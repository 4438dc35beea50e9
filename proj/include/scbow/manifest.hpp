#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "scbow/model.hpp"

namespace scbow {

std::string_view version();

// FNV-1a over raw bytes; for directories, over the sorted file names and
// their contents. Cheap content fingerprint for the run manifest, not a
// cryptographic hash.
uint64_t fnv1a64(std::string_view bytes, uint64_t seed_hash = 0xcbf29ce484222325ULL);
uint64_t digest_corpus(const std::filesystem::path& path);

// Everything needed to reproduce a training run bit for bit: the resolved
// configuration, the seed, and a fingerprint of the corpus it saw.
struct RunManifest {
  std::string command;
  std::filesystem::path corpus;
  uint64_t corpus_digest = 0;
  TrainConfig config;
  std::size_t vocab_size = 0;
  uint64_t total_batches = 0;
  uint64_t examples_seen = 0;
  uint64_t skipped_examples = 0;
  double wall_seconds = 0.0;
  std::string started_at;
  std::filesystem::path output;
};

std::string render_manifest(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path);

// Current UTC time as an ISO-8601 stamp, for the manifest.
std::string utc_timestamp();

}  // namespace scbow
