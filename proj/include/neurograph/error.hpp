#ifndef NEUROGRAPH_ERROR_HPP
#define NEUROGRAPH_ERROR_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ng {

enum class ErrorKind {
  invalid,  // bad arguments, malformed input, contract violations
  io,       // file not found, truncated/corrupt files
  numeric,  // NaN loss, divergence, degenerate spectra
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
  throw Error(ErrorKind::io, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
  throw Error(ErrorKind::numeric, msg);
}

// Non-fatal diagnostics (coincident channels, degenerate maps). The default
// handler writes to stderr; tests install their own to capture messages.
using WarnHandler = std::function<void(std::string_view)>;
void set_warn_handler(WarnHandler handler);  // empty handler restores default
void warn(std::string_view msg);

}  // namespace ng

#endif
