#include "crftag/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <charconv>
#include <cstdio>

#include "crftag/error.hpp"

namespace crftag {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EncodingError: return "EncodingError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateTag: return "DuplicateTag";
    case ErrorCode::DanglingParent: return "DanglingParent";
    case ErrorCode::NonInjectiveDecomposition: return "NonInjectiveDecomposition";
    case ErrorCode::UnknownComponentSymbol: return "UnknownComponentSymbol";
    case ErrorCode::SchemaSyntax: return "SchemaSyntax";
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::InvalidCombination: return "InvalidCombination";
    case ErrorCode::NoValidTuple: return "NoValidTuple";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::BadColumn: return "BadColumn";
    case ErrorCode::ColumnMismatch: return "ColumnMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::ModelFormat: return "ModelFormat";
    case ErrorCode::UndecomposableTag: return "UndecomposableTag";
    case ErrorCode::TooFewSentences: return "TooFewSentences";
    case ErrorCode::PipelineConfig: return "PipelineConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

namespace text {

bool is_valid_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) return false;
  }
  return true;
}

std::string to_nfc(std::string_view s) {
  if (!is_valid_utf8(s)) fail(ErrorCode::EncodingError, "input is not valid UTF-8");
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorCode::Internal, "ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  if (nfc->isNormalized(src, status) && U_SUCCESS(status)) return std::string(s);
  status = U_ZERO_ERROR;
  const icu::UnicodeString normalized = nfc->normalize(src, status);
  if (U_FAILURE(status)) fail(ErrorCode::EncodingError, "NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::vector<std::string_view> code_points(std::string_view s) {
  std::vector<std::string_view> out;
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) fail(ErrorCode::EncodingError, "invalid UTF-8 sequence");
    out.push_back(s.substr(static_cast<std::size_t>(start),
                           static_cast<std::size_t>(i - start)));
  }
  return out;
}

std::size_t code_point_count(std::string_view s) { return code_points(s).size(); }

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: " + std::string(s));
  return v;
}

}  // namespace text
}  // namespace crftag
