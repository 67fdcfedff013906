#include "diastyle/unicode_text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace diastyle::text {

std::string unicode_version() {
  UVersionInfo info;
  u_getUnicodeVersion(info);
  char buf[U_MAX_VERSION_STRING_LENGTH];
  u_versionToString(info, buf);
  return buf;
}

std::u32string decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode(std::u32string_view scalars) {
  std::string out;
  out.reserve(scalars.size());
  for (char32_t c : scalars) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) {
      out += "\xEF\xBF\xBD";
      continue;
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

std::size_t scalar_count(std::string_view utf8) { return decode(utf8).size(); }

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const auto* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  const auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  const auto normalized = normalizer->normalize(source, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string fold_case(std::string_view utf8) {
  auto s = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  s.foldCase(U_FOLD_CASE_DEFAULT);
  std::string out;
  s.toUTF8String(out);
  return out;
}

bool is_white_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

bool is_punctuation(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

bool is_letter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)); }

bool is_extended_pictographic(char32_t c) {
  return u_hasBinaryProperty(static_cast<UChar32>(c), UCHAR_EXTENDED_PICTOGRAPHIC);
}

std::string strip_punctuation(std::string_view utf8) {
  const auto scalars = decode(utf8);
  std::size_t begin = 0;
  std::size_t end = scalars.size();
  while (begin < end && is_punctuation(scalars[begin])) ++begin;
  while (end > begin && is_punctuation(scalars[end - 1])) --end;
  return encode(std::u32string_view(scalars).substr(begin, end - begin));
}

std::vector<Token> tokenize(std::string_view utf8) {
  const auto scalars = decode(nfc(utf8));
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < scalars.size()) {
    while (i < scalars.size() && is_white_space(scalars[i])) ++i;
    const std::size_t start = i;
    while (i < scalars.size() && !is_white_space(scalars[i])) ++i;
    if (i > start) {
      Token t;
      t.text = encode(std::u32string_view(scalars).substr(start, i - start));
      t.key = strip_punctuation(fold_case(t.text));
      tokens.push_back(std::move(t));
    }
  }
  return tokens;
}

}  // namespace diastyle::text
