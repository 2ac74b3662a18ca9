#ifndef CRFTAG_TEXT_HPP_
#define CRFTAG_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace crftag::text {

bool is_valid_utf8(std::string_view s);

/// NFC-normalizes UTF-8 input. Throws EncodingError on malformed input.
std::string to_nfc(std::string_view s);

/// Splits UTF-8 into Unicode scalar values (as UTF-8 substrings).
std::vector<std::string_view> code_points(std::string_view s);

std::size_t code_point_count(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view s);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

double parse_double(std::string_view s);

}  // namespace crftag::text

#endif  // CRFTAG_TEXT_HPP_
