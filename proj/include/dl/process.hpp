#pragma once

// Child process with piped standard streams (POSIX).

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace dl {

class Subprocess {
 public:
  // argv[0] is looked up on PATH when it contains no '/'. Throws
  // dl::Error when the program cannot be started.
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  bool write(const std::string& data);
  void close_stdin();
  // Next '\n'-terminated line without the newline; nullopt on timeout or EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  // Everything until EOF; nullopt on timeout.
  std::optional<std::string> read_all(std::chrono::milliseconds timeout);
  bool eof() const { return eof_; }
  void kill();
  // Exit status after the child ends, or -1 if it was killed.
  int wait();

 private:
  bool fill(std::chrono::steady_clock::time_point deadline);

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
  bool reaped_ = false;
  int status_ = -1;
};

// Resolves `name` against PATH; returns empty when not found.
std::string find_executable(const std::string& name);

}  // namespace dl
