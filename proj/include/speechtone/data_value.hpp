#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <variant>

namespace speechtone {

/// One cell of tabular data: null, finite number, UTF-8 text, or boolean.
class DataValue {
 public:
  using Storage = std::variant<std::monostate, double, std::string, bool>;

  DataValue() = default;
  static DataValue null() { return DataValue(); }
  static DataValue number(double v) { return DataValue(Storage(v)); }
  static DataValue text(std::string v) { return DataValue(Storage(std::move(v))); }
  static DataValue boolean(bool v) { return DataValue(Storage(v)); }

  bool is_null() const { return std::holds_alternative<std::monostate>(storage_); }
  bool is_number() const { return std::holds_alternative<double>(storage_); }
  bool is_text() const { return std::holds_alternative<std::string>(storage_); }
  bool is_boolean() const { return std::holds_alternative<bool>(storage_); }

  double as_number() const { return std::get<double>(storage_); }
  const std::string& as_text() const { return std::get<std::string>(storage_); }
  bool as_boolean() const { return std::get<bool>(storage_); }

  const Storage& storage() const { return storage_; }

  friend bool operator==(const DataValue&, const DataValue&) = default;

 private:
  explicit DataValue(Storage s) : storage_(std::move(s)) {}
  Storage storage_;
};

/// Renders a number the way it should be spoken: integral values without a
/// decimal point ("1971"), others with at most two decimals, trailing zeros
/// trimmed ("20.5", "0.79").
inline std::string format_speech_number(double v) {
  constexpr double kExactIntLimit = 9007199254740992.0;  // 2^53
  if (v == std::floor(v) && std::fabs(v) < kExactIntLimit) {
    auto i = static_cast<std::int64_t>(v);
    return std::to_string(i);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (auto dot = s.find('.'); dot != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

/// Text used when a cell is vocalized. Null renders as the empty string.
inline std::string to_speech_text(const DataValue& v) {
  if (v.is_number()) return format_speech_number(v.as_number());
  if (v.is_text()) return v.as_text();
  if (v.is_boolean()) return v.as_boolean() ? "true" : "false";
  return {};
}

/// Parses a whole string as a finite or non-finite double. Leading/trailing
/// whitespace is not accepted.
inline bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') {
    ++first;
    if (first == last || *first == '-') return false;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace speechtone
