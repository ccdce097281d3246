#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qlfit {

// Exact monetary amount with up to six fractional digits, stored as a
// scaled integer. Transaction files are parsed into this type so that
// parse -> serialize -> parse round-trips exactly; conversion to double
// happens only inside the likelihood engine.
class Decimal {
public:
  static constexpr int64_t kScale = 1'000'000;  // micro-units
  static constexpr int kFracDigits = 6;

  constexpr Decimal() = default;

  static constexpr Decimal from_micro(int64_t micro) {
    Decimal d;
    d.micro_ = micro;
    return d;
  }

  static constexpr Decimal from_int(int64_t units) {
    return from_micro(units * kScale);
  }

  // Nearest representable value, ties away from zero.
  static Decimal from_double_rounded(double value);

  // Accepts [+-]digits[.digits] with at most six fractional digits.
  static std::optional<Decimal> parse(std::string_view text);

  // Normalized form: no exponent, no trailing fractional zeros, no
  // trailing '.', "-0" never produced.
  std::string to_string() const;

  double to_double() const { return static_cast<double>(micro_) / kScale; }
  int64_t micro() const { return micro_; }
  bool is_negative() const { return micro_ < 0; }

  friend auto operator<=>(const Decimal&, const Decimal&) = default;

private:
  int64_t micro_ = 0;
};

}  // namespace qlfit
