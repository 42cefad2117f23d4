#pragma once

#include <stdexcept>
#include <string>

namespace spk {

// Every failure raised by the library carries one of these codes. The CLI
// prints "error:<category>: <message>" and maps the code to a process exit
// status: 1 usage, 2 data/format, 3 numerical.
enum class Errc {
  usage,
  io,
  format,
  truncation,
  shape,
  invalid_spec,
  invalid_argument,
  invalid_offset,
  invalid_point,
  unsupported_kind,
  solver_failure,
  convergence,
  divergence,
  undefined_metric,
  empty_input,
  degenerate_input,
  consistency,
};

const char* errc_name(Errc c);
int errc_exit_code(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  const char* category() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace spk
