#include "scbow/rng.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "scbow/errors.hpp"

namespace scbow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kInv2Pow53 = 1.0 / 9007199254740992.0;
}  // namespace

std::size_t Rng::uniform_index(std::size_t bound) {
  if (bound == 0) {
    throw InvalidConfig("uniform_index: bound must be positive");
  }
  const uint64_t range = bound;
  // Reject draws from the tail that would bias the modulo.
  const uint64_t limit =
      std::numeric_limits<uint64_t>::max() -
      std::numeric_limits<uint64_t>::max() % range;
  uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

double Rng::unit_open() {
  // 53 uniform bits mapped to (0, 1]; never 0, so log() is safe.
  return static_cast<double>((engine_() >> 11) + 1) * kInv2Pow53;
}

double Rng::normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  const double u1 = unit_open();
  const double u2 = unit_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = kTwoPi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return mean + stddev * radius * std::cos(angle);
}

std::string Rng::serialize() const {
  std::ostringstream out;
  out << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), spare_,
                           std::chars_format::hex);
  out.write(buf, res.ptr - buf);
  return out.str();
}

Rng Rng::deserialize(const std::string& state) {
  Rng rng(0);
  std::istringstream in(state);
  in >> rng.engine_;
  int has_spare = 0;
  std::string spare_hex;
  in >> has_spare >> spare_hex;
  if (!in) {
    throw Corrupted("malformed random-source state");
  }
  rng.has_spare_ = has_spare != 0;
  auto res = std::from_chars(spare_hex.data(),
                             spare_hex.data() + spare_hex.size(), rng.spare_,
                             std::chars_format::hex);
  if (res.ec != std::errc{}) {
    throw Corrupted("malformed random-source state");
  }
  return rng;
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  // stream + 1 so that (0, 0) does not sit on the finalizer's fixed point
  uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace scbow
