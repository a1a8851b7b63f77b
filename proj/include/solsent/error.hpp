#pragma once

#include <stdexcept>
#include <string>

namespace solsent {

/// Process exit codes used by the CLI.
enum class ExitCode : int {
  ok = 0,
  input_error = 1,
  stage_failure = 2,
  protocol_failure = 3,
};

/// Bad input file, bad config, or a violated load-time invariant.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pipeline stage could not produce its output from valid input
/// (singular design matrix, empty aggregation, ...).
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An external classifier backend broke the wire protocol or timed out.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(const std::string& what, std::string failing_id = {})
      : std::runtime_error(failing_id.empty() ? what : what + " (id " + failing_id + ")"),
        failing_id_(std::move(failing_id)) {}

  const std::string& failing_id() const noexcept { return failing_id_; }

 private:
  std::string failing_id_;
};

}  // namespace solsent
