#ifndef SCBOW_TEXT_HPP_
#define SCBOW_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace scbow {

// Tokenization used everywhere a raw sentence enters the system: UTF-8
// decoding, lowercasing (Latin, Greek, Cyrillic; other scripts pass
// through), whitespace splitting, and punctuation stripped from token
// edges. Tokens that are entirely punctuation vanish.
std::vector<std::string> tokenize(std::string_view line);

// Lowercased copy of the input, UTF-8 aware. Bytes that do not form a valid
// UTF-8 sequence are kept verbatim.
std::string lowercase(std::string_view text);

namespace utf8 {

// Decodes one code point starting at text[pos]. Advances pos past the
// sequence. Invalid bytes decode as themselves (one byte at a time).
uint32_t decode(std::string_view text, std::size_t& pos);

void append(std::string& out, uint32_t cp);

bool is_whitespace(uint32_t cp);
bool is_edge_punctuation(uint32_t cp);
uint32_t to_lower(uint32_t cp);

}  // namespace utf8

}  // namespace scbow

#endif  // SCBOW_TEXT_HPP_
