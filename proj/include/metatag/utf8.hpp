#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metatag::utf8 {

// Byte offset of the first malformed sequence, or nullopt when valid.
std::optional<std::size_t> find_invalid(std::string_view text);

// Splits into code points (each returned as its UTF-8 byte string).
// The input must be valid UTF-8.
std::vector<std::string> code_points(std::string_view text);

// Byte length of the code point starting with `lead`.
std::size_t sequence_length(unsigned char lead);

// Lowercases ASCII and the Latin-1 capitals U+00C0..U+00DE.
std::string to_lower(std::string_view text);

}  // namespace metatag::utf8
