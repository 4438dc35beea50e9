#pragma once

#include <filesystem>
#include <iosfwd>

#include "scbow/corpus.hpp"
#include "scbow/model.hpp"

namespace scbow {

// A vocabulary and its embedding rows, together. Imported tables carry
// zero counts; tables from training keep the corpus frequencies.
struct EmbeddingTable {
  Vocabulary vocab;
  EmbeddingMatrix matrix;
};

// Text exchange format: a "V d" header line, then one "token v1 ... vd"
// line per row, space separated. Values use shortest-round-trip decimals,
// so import(export(t)) reproduces t bit-exactly.
void export_text(const EmbeddingTable& table, std::ostream& out);
void export_text(const EmbeddingTable& table,
                 const std::filesystem::path& path);

EmbeddingTable import_text(std::istream& in);
EmbeddingTable import_text(const std::filesystem::path& path);

// Binary checkpoint: embedding table plus the optimizer position, enough
// to resume a run at an epoch boundary and reproduce the uninterrupted
// run bit for bit. Little-endian on disk regardless of host.
struct Checkpoint {
  EmbeddingTable table;
  OptimizerState state;
};

void save_checkpoint(const EmbeddingTable& table, const OptimizerState& state,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// True when the file starts with the checkpoint magic bytes.
bool is_checkpoint_file(const std::filesystem::path& path);

// Reads either format, sniffing by magic.
EmbeddingTable load_table(const std::filesystem::path& path);

}  // namespace scbow
