#pragma once

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>

namespace specseg::detail {

/// Child process running `/bin/sh -c command` with its stdin and stdout bound
/// to one socket, so writes to a dead child fail with EPIPE instead of raising
/// SIGPIPE. stderr is inherited.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// False when the child is gone.
  bool write_line(const std::string& line);

  enum class ReadStatus { line, eof, timeout };
  ReadStatus read_line(std::string& out, std::chrono::milliseconds timeout);

  /// Closes the child's input and waits for it up to `grace`, then kills it.
  /// Returns the exit status (or 128 + signal).
  int finish(std::chrono::milliseconds grace = std::chrono::seconds(2));
  void kill();

  bool running() const noexcept { return pid_ > 0; }

 private:
  std::optional<int> reap(bool block);

  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
  std::optional<int> exit_status_;
};

}  // namespace specseg::detail
