#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topicshift {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string join(std::span<const std::string> parts, std::string_view sep);
std::string ascii_lower(std::string_view s);

inline bool is_utf8_continuation(char c) {
  return (static_cast<unsigned char>(c) & 0xC0) == 0x80;
}

/// Byte length of the UTF-8 character starting at `pos` (1 for stray bytes).
std::size_t utf8_char_length(std::string_view s, std::size_t pos);

}  // namespace topicshift
