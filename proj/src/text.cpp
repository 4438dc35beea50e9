#include "scbow/text.hpp"

namespace scbow {
namespace utf8 {

// Bytes that are not valid UTF-8 decode to kRawByte + value, and append()
// writes them back verbatim, so malformed input survives a round trip
// instead of collapsing onto a replacement character.
constexpr uint32_t kRawByte = 0x110000;

uint32_t decode(std::string_view text, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<uint32_t>(static_cast<unsigned char>(text[i]));
  };
  const uint32_t b0 = byte(pos);
  std::size_t len = 0;
  uint32_t cp = 0;
  if (b0 < 0x80) {
    pos += 1;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    pos += 1;
    return kRawByte + b0;  // stray continuation or invalid lead byte
  }
  if (pos + len > text.size()) {
    pos += 1;
    return kRawByte + b0;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const uint32_t bi = byte(pos + i);
    if ((bi & 0xC0) != 0x80) {
      pos += 1;
      return kRawByte + b0;
    }
    cp = (cp << 6) | (bi & 0x3F);
  }
  if (cp > 0x10FFFF) {
    pos += 1;
    return kRawByte + b0;
  }
  pos += len;
  return cp;
}

void append(std::string& out, uint32_t cp) {
  if (cp >= kRawByte) {
    out.push_back(static_cast<char>(cp - kRawByte));
    return;
  }
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_whitespace(uint32_t cp) {
  switch (cp) {
    case ' ':
    case '\t':
    case '\n':
    case '\r':
    case '\v':
    case '\f':
    case 0x00A0:  // no-break space
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_edge_punctuation(uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
           (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
  }
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00AB:  // guillemets
    case 0x00BB:
    case 0x00BF:  // inverted question mark
    case 0x2039:  // single guillemets
    case 0x203A:
    case 0x00B7:  // middle dot
      return true;
    default:
      // general punctuation block: hyphens, dashes, curly quotes,
      // ellipsis, daggers, bullets
      return cp >= 0x2010 && cp <= 0x2027;
  }
}

uint32_t to_lower(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0x80) return cp;
  // Latin-1 supplement (multiplication sign excluded)
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  // Latin Extended-A: alternating case pairs
  if (cp >= 0x0100 && cp <= 0x0137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x0139 && cp <= 0x0148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x014A && cp <= 0x0177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x0178) return 0x00FF;
  if (cp >= 0x0179 && cp <= 0x017E) return (cp % 2 == 1) ? cp + 1 : cp;
  // Greek
  if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;
  // Cyrillic
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  return cp;
}

}  // namespace utf8

std::string lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    utf8::append(out, utf8::to_lower(utf8::decode(text, pos)));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::vector<uint32_t> current;
  std::size_t pos = 0;

  const auto flush = [&]() {
    if (current.empty()) return;
    std::size_t begin = 0;
    std::size_t end = current.size();
    while (begin < end && utf8::is_edge_punctuation(current[begin])) ++begin;
    while (end > begin && utf8::is_edge_punctuation(current[end - 1])) --end;
    if (begin < end) {
      std::string token;
      for (std::size_t i = begin; i < end; ++i) {
        utf8::append(token, current[i]);
      }
      tokens.push_back(std::move(token));
    }
    current.clear();
  };

  while (pos < line.size()) {
    const uint32_t cp = utf8::decode(line, pos);
    if (utf8::is_whitespace(cp)) {
      flush();
    } else {
      current.push_back(utf8::to_lower(cp));
    }
  }
  flush();
  return tokens;
}

}  // namespace scbow
