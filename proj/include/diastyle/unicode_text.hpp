#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Thin wrappers over ICU used by the feature extractors. Character
// properties follow the Unicode version of the linked ICU (ICU 70 ->
// Unicode 14.0); `unicode_version()` reports it at runtime.
namespace diastyle::text {

std::string unicode_version();

std::u32string decode(std::string_view utf8);  // invalid bytes -> U+FFFD
std::string encode(std::u32string_view scalars);

std::size_t scalar_count(std::string_view utf8);
std::string nfc(std::string_view utf8);
std::string fold_case(std::string_view utf8);  // full Unicode case folding

bool is_white_space(char32_t c);
bool is_punctuation(char32_t c);  // general category P*
bool is_letter(char32_t c);
bool is_extended_pictographic(char32_t c);

// Strips leading and trailing punctuation scalars.
std::string strip_punctuation(std::string_view utf8);

struct Token {
  std::string text;  // NFC, verbatim case
  std::string key;   // case-folded, punctuation stripped; may be empty
};

// NFC-normalizes, then splits on White_Space runs.
std::vector<Token> tokenize(std::string_view utf8);

}  // namespace diastyle::text
