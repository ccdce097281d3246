#include "qlfit/decimal.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace qlfit {

Decimal Decimal::from_double_rounded(double value) {
  const double scaled = value * static_cast<double>(kScale);
  return from_micro(static_cast<int64_t>(std::llround(scaled)));
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;

  size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }
  if (pos == text.size()) return std::nullopt;

  constexpr int64_t kMax = std::numeric_limits<int64_t>::max();
  int64_t units = 0;
  size_t int_digits = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    const int64_t digit = text[pos] - '0';
    if (units > (kMax - digit) / 10) return std::nullopt;  // overflow
    units = units * 10 + digit;
    ++pos;
    ++int_digits;
  }

  int64_t frac = 0;
  size_t frac_digits = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (frac_digits == kFracDigits) return std::nullopt;  // too precise
      frac = frac * 10 + (text[pos] - '0');
      ++pos;
      ++frac_digits;
    }
    if (frac_digits == 0) return std::nullopt;  // bare trailing '.'
  }

  if (pos != text.size()) return std::nullopt;  // junk after number
  if (int_digits == 0 && frac_digits == 0) return std::nullopt;

  for (size_t i = frac_digits; i < kFracDigits; ++i) frac *= 10;

  if (units > (kMax - frac) / kScale) return std::nullopt;
  int64_t micro = units * kScale + frac;
  if (negative) micro = -micro;
  return from_micro(micro);
}

std::string Decimal::to_string() const {
  int64_t micro = micro_;
  std::string out;
  if (micro < 0) {
    out.push_back('-');
    micro = -micro;
  }
  out += std::to_string(micro / kScale);
  int64_t frac = micro % kScale;
  if (frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frac));
    std::string_view digits(buf, kFracDigits);
    while (digits.ends_with('0')) digits.remove_suffix(1);
    out.push_back('.');
    out += digits;
  }
  if (out == "-0") out = "0";
  return out;
}

}  // namespace qlfit
