#include "scbow/embedio.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "scbow/errors.hpp"

namespace scbow {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'B', 'W'};
constexpr uint32_t kVersion = 1;

// Generous shape caps so a corrupted header fails fast instead of trying
// to allocate terabytes.
constexpr uint64_t kMaxVocab = 50'000'000;
constexpr uint64_t kMaxDim = 100'000;
constexpr uint64_t kMaxCells = 500'000'000;
constexpr uint32_t kMaxTokenBytes = 1 << 20;
constexpr uint32_t kMaxRngStateBytes = 1 << 16;

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

double parse_double(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError("bad vector component '" + field + "'", line_no);
  }
  return value;
}

void check_shape(uint64_t vocab_size, uint64_t dim) {
  if (vocab_size == 0 || dim == 0 || vocab_size > kMaxVocab ||
      dim > kMaxDim || vocab_size * dim > kMaxCells) {
    throw IncompatibleCheckpoint("implausible embedding shape " +
                                 std::to_string(vocab_size) + " x " +
                                 std::to_string(dim));
  }
}

void put_u32(std::string& out, uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFF));
  }
}

void put_u64(std::string& out, uint64_t v) {
  for (int shift = 0; shift < 64; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFF));
  }
}

void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<uint64_t>(v));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& data) : data_(data) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int shift = 0; shift < 32; shift += 8) {
      v |= static_cast<uint32_t>(
               static_cast<unsigned char>(data_[pos_++]))
           << shift;
    }
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 8) {
      v |= static_cast<uint64_t>(
               static_cast<unsigned char>(data_[pos_++]))
           << shift;
    }
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw IncompatibleCheckpoint("checkpoint file is truncated");
    }
  }

  const std::string& data_;
  std::size_t pos_ = 0;
};

void check_table(const EmbeddingTable& table) {
  if (table.vocab.size() != table.matrix.vocab_size()) {
    throw Corrupted("vocabulary and matrix disagree on the row count");
  }
}

}  // namespace

void export_text(const EmbeddingTable& table, std::ostream& out) {
  check_table(table);
  const std::size_t d = table.matrix.dim();

  out << table.vocab.size() << ' ' << d << '\n';
  for (uint32_t id = 0; id < table.vocab.size(); ++id) {
    const std::string& token = table.vocab.token(id);
    if (token.empty() ||
        token.find_first_of(" \t\n\r") != std::string::npos) {
      throw SerializationError(
          "token '" + token +
          "' cannot be written to the space-separated text format");
    }
    out << token;
    const auto row = table.matrix.row(id);
    for (std::size_t k = 0; k < d; ++k) {
      if (!std::isfinite(row[k])) {
        throw SerializationError("non-finite value in row for '" + token +
                                 "'");
      }
      out << ' ' << format_double(row[k]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed while exporting embeddings");
}

void export_text(const EmbeddingTable& table,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  export_text(table, out);
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

EmbeddingTable import_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("missing header line", 1);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  uint64_t vocab_size = 0;
  uint64_t dim = 0;
  {
    const char* begin = line.data();
    const char* end = begin + line.size();
    auto [p1, e1] = std::from_chars(begin, end, vocab_size);
    if (e1 != std::errc{} || p1 == end || *p1 != ' ') {
      throw ParseError("header must be 'vocab_size dim'", 1);
    }
    auto [p2, e2] = std::from_chars(p1 + 1, end, dim);
    if (e2 != std::errc{} || p2 != end) {
      throw ParseError("header must be 'vocab_size dim'", 1);
    }
  }
  try {
    check_shape(vocab_size, dim);
  } catch (const IncompatibleCheckpoint& e) {
    throw ParseError(e.what(), 1);
  }

  EmbeddingMatrix matrix(vocab_size, dim);
  std::vector<std::pair<std::string, uint64_t>> entries;
  entries.reserve(vocab_size);
  std::unordered_set<std::string> seen;
  seen.reserve(vocab_size);

  for (uint64_t row_index = 0; row_index < vocab_size; ++row_index) {
    const std::size_t line_no = row_index + 2;
    if (!std::getline(in, line)) {
      throw ParseError("file ends after " + std::to_string(row_index) +
                           " of " + std::to_string(vocab_size) + " rows",
                       line_no);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::size_t begin = 0;
    std::vector<std::string> fields;
    fields.reserve(dim + 1);
    while (begin <= line.size()) {
      const std::size_t space = line.find(' ', begin);
      if (space == std::string::npos) {
        fields.push_back(line.substr(begin));
        break;
      }
      fields.push_back(line.substr(begin, space - begin));
      begin = space + 1;
    }
    if (fields.size() != dim + 1) {
      throw ParseError("expected a token and " + std::to_string(dim) +
                           " components, got " +
                           std::to_string(fields.size()) + " fields",
                       line_no);
    }
    if (fields[0].empty()) {
      throw ParseError("empty token", line_no);
    }
    if (!seen.insert(fields[0]).second) {
      throw ParseError("duplicate token '" + fields[0] + "'", line_no);
    }

    auto row = matrix.row(row_index);
    for (uint64_t k = 0; k < dim; ++k) {
      row[k] = parse_double(fields[k + 1], line_no);
    }
    entries.emplace_back(std::move(fields[0]), 0);
  }

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      throw ParseError("more rows than the header promises",
                       vocab_size + 2);
    }
  }

  EmbeddingTable table;
  table.vocab = Vocabulary(std::move(entries), 0);
  table.matrix = std::move(matrix);
  return table;
}

EmbeddingTable import_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return import_text(in);
}

void save_checkpoint(const EmbeddingTable& table, const OptimizerState& state,
                     const std::filesystem::path& path) {
  check_table(table);
  if (state.rng_state.size() > kMaxRngStateBytes) {
    throw SerializationError("oversized generator state");
  }

  std::string buffer;
  const std::size_t cells =
      table.matrix.vocab_size() * table.matrix.dim();
  buffer.reserve(64 + cells * 8 + table.vocab.size() * 16);

  buffer.append(kMagic, sizeof(kMagic));
  put_u32(buffer, kVersion);
  put_u64(buffer, table.matrix.vocab_size());
  put_u64(buffer, table.matrix.dim());
  for (const double value : table.matrix.values()) put_f64(buffer, value);

  put_u32(buffer, table.vocab.min_count());
  for (uint32_t id = 0; id < table.vocab.size(); ++id) {
    const std::string& token = table.vocab.token(id);
    if (token.size() > kMaxTokenBytes) {
      throw SerializationError("oversized token");
    }
    put_u32(buffer, static_cast<uint32_t>(token.size()));
    buffer.append(token);
    put_u64(buffer, table.vocab.count(id));
  }

  put_u64(buffer, state.batches_done);
  put_u64(buffer, state.total_batches);
  put_u64(buffer, state.seed);
  put_u32(buffer, static_cast<uint32_t>(state.rng_state.size()));
  buffer.append(state.rng_state);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream raw;
  raw << in.rdbuf();
  if (!in) throw IoError("read failed for " + path.string());
  const std::string data = std::move(raw).str();

  ByteReader reader(data);
  if (reader.bytes(4) != std::string(kMagic, sizeof(kMagic))) {
    throw IncompatibleCheckpoint(path.string() + " is not a checkpoint file");
  }
  if (const uint32_t version = reader.u32(); version != kVersion) {
    throw IncompatibleCheckpoint("unsupported checkpoint version " +
                                 std::to_string(version));
  }

  const uint64_t vocab_size = reader.u64();
  const uint64_t dim = reader.u64();
  check_shape(vocab_size, dim);

  Checkpoint checkpoint;
  EmbeddingMatrix matrix(vocab_size, dim);
  for (double& value : matrix.values()) value = reader.f64();
  checkpoint.table.matrix = std::move(matrix);

  const uint32_t min_count = reader.u32();
  std::vector<std::pair<std::string, uint64_t>> entries;
  entries.reserve(vocab_size);
  for (uint64_t i = 0; i < vocab_size; ++i) {
    const uint32_t token_len = reader.u32();
    if (token_len > kMaxTokenBytes) {
      throw IncompatibleCheckpoint("implausible token length");
    }
    std::string token = reader.bytes(token_len);
    const uint64_t count = reader.u64();
    entries.emplace_back(std::move(token), count);
  }
  try {
    checkpoint.table.vocab = Vocabulary(std::move(entries), min_count);
  } catch (const Corrupted& e) {
    throw IncompatibleCheckpoint(std::string("bad vocabulary block: ") +
                                 e.what());
  }

  checkpoint.state.batches_done = reader.u64();
  checkpoint.state.total_batches = reader.u64();
  checkpoint.state.seed = reader.u64();
  const uint32_t rng_len = reader.u32();
  if (rng_len > kMaxRngStateBytes) {
    throw IncompatibleCheckpoint("implausible generator state length");
  }
  checkpoint.state.rng_state = reader.bytes(rng_len);

  if (!reader.done()) {
    throw IncompatibleCheckpoint("trailing bytes after checkpoint payload");
  }
  if (checkpoint.state.batches_done > checkpoint.state.total_batches) {
    throw IncompatibleCheckpoint("optimizer position beyond the batch plan");
  }
  return checkpoint;
}

bool is_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char head[4] = {};
  in.read(head, sizeof(head));
  return in.gcount() == sizeof(head) &&
         std::string(head, sizeof(head)) == std::string(kMagic, 4);
}

EmbeddingTable load_table(const std::filesystem::path& path) {
  if (is_checkpoint_file(path)) return load_checkpoint(path).table;
  return import_text(path);
}

}  // namespace scbow
