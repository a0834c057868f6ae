#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace boneloc {

/// Typed runtime error. `kind` is a stable short tag ("empty roi",
/// "tracking lost", ...) that the CLI prints as `error[kind]: message`.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace boneloc
