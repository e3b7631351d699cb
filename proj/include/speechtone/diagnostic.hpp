#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace speechtone {

enum class Severity { error, warning };

inline const char* to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

/// A structured validation or compilation finding.
///
/// `code` is a stable identifier (E_* for errors, W_* for warnings) and is
/// part of the tool's external contract. `message` is free text. `path` is a
/// dotted location inside the input spec document (`encoding.time.field`,
/// `transform[0].filter`); the document root is `$`.
struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  std::string path = "$";

  bool is_error() const { return severity == Severity::error; }
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

inline Diagnostic make_error(std::string code, std::string path, std::string message) {
  return {Severity::error, std::move(code), std::move(message), std::move(path)};
}

inline Diagnostic make_warning(std::string code, std::string path, std::string message) {
  return {Severity::warning, std::move(code), std::move(message), std::move(path)};
}

inline bool has_errors(const Diagnostics& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.is_error(); });
}

/// `<severity> <code> <path>: <message>`
inline std::string format_diagnostic(const Diagnostic& d) {
  return std::string(to_string(d.severity)) + " " + d.code + " " + d.path + ": " + d.message;
}

inline void append(Diagnostics& into, const Diagnostics& from) {
  into.insert(into.end(), from.begin(), from.end());
}

/// Value-or-diagnostics. A successful result may still carry warnings.
template <typename T>
class Result {
 public:
  Result(T value, Diagnostics warnings = {})
      : value_(std::move(value)), diagnostics_(std::move(warnings)) {}
  Result(Diagnostic failure) : diagnostics_{std::move(failure)} {}
  Result(Diagnostics failures) : diagnostics_(std::move(failures)) {}

  bool ok() const { return value_.has_value(); }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return *value_; }
  T& value() & { return *value_; }
  T&& value() && { return std::move(*value_); }
  const T* operator->() const { return &*value_; }
  const T& operator*() const { return *value_; }

  const Diagnostics& diagnostics() const { return diagnostics_; }
  Diagnostics take_diagnostics() { return std::move(diagnostics_); }

 private:
  std::optional<T> value_;
  Diagnostics diagnostics_;
};

}  // namespace speechtone
