#ifndef SCBOW_RNG_HPP_
#define SCBOW_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace scbow {

// Deterministic random source. All randomized behavior in the library goes
// through this wrapper rather than <random> distributions, whose output is
// implementation-defined; the draws here are fully specified by the seed so
// that runs can be reproduced and resumed bit-exactly.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Unbiased draw from {0, ..., bound-1} via rejection sampling.
  std::size_t uniform_index(std::size_t bound);

  // Uniform double in (0, 1].
  double unit_open();

  // Normal draw via the Box-Muller transform. Generates values in pairs and
  // caches the second, so the stream advances two uniforms every other call.
  double normal(double mean, double stddev);

  // State round-trip for exact resume. The serialized form includes the
  // cached Box-Muller spare.
  std::string serialize() const;
  static Rng deserialize(const std::string& state);

  bool operator==(const Rng& other) const = default;

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream-splitting hash (splitmix64 finalizer). Used to derive independent
// seeds for the matrix initializer and the example stream from one run seed.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

}  // namespace scbow

#endif  // SCBOW_RNG_HPP_
