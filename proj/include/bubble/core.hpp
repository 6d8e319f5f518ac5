#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace bubble {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Failure classes. The CLI maps Validation to exit code 2 and the other
/// two to exit code 3.
enum class ErrorKind {
  Validation,  // malformed input or violated precondition
  Domain,      // argument outside the mathematical domain of an operation
  Algorithmic  // an invariant the algorithm relies on did not hold
};

/// Library error carrying the failing module/operation and, when the
/// failure is tied to one member of a sequence, its index.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string where, const std::string& what,
        std::optional<int> k_index = std::nullopt)
      : std::runtime_error(format(where, what, k_index)),
        kind_(kind),
        where_(std::move(where)),
        k_index_(k_index) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& where() const noexcept { return where_; }
  std::optional<int> k_index() const noexcept { return k_index_; }

  /// Same error re-tagged with a sequence index.
  Error at_index(int k) const {
    return Error(kind_, where_, bare_message(), k);
  }

  std::string bare_message() const {
    std::string m = what();
    auto pos = m.find(": ");
    return pos == std::string::npos ? m : m.substr(pos + 2);
  }

 private:
  static std::string format(const std::string& where, const std::string& what,
                            std::optional<int> k) {
    std::string head = where;
    if (k) head += "[k=" + std::to_string(*k) + "]";
    return head + ": " + what;
  }

  ErrorKind kind_;
  std::string where_;
  std::optional<int> k_index_;
};

}  // namespace bubble
