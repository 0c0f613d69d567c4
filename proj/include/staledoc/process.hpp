#pragma once

#include <string>
#include <string_view>
#include <sys/types.h>
#include <utility>
#include <vector>

namespace staledoc {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;

  bool ok() const { return exit_code == 0; }
};

/// Extra environment entries layered over the parent environment.
using EnvOverrides = std::vector<std::pair<std::string, std::string>>;

/// Runs `argv` to completion, capturing stdout and stderr. `argv[0]` is
/// resolved through PATH. Throws std::system_error if the process cannot be
/// spawned at all; a non-zero exit is reported through the result.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const EnvOverrides& env = {},
                          std::string_view stdin_data = {});

/// A long-running child with pipes on stdin and stdout. Used for
/// `git cat-file --batch`, which answers one request per line.
class PipedProcess {
 public:
  explicit PipedProcess(const std::vector<std::string>& argv);
  ~PipedProcess();

  PipedProcess(const PipedProcess&) = delete;
  PipedProcess& operator=(const PipedProcess&) = delete;
  PipedProcess(PipedProcess&& other) noexcept;
  PipedProcess& operator=(PipedProcess&& other) noexcept;

  void write(std::string_view data);
  /// Reads up to and excluding the next '\n'. Returns false on EOF.
  bool read_line(std::string& line);
  /// Reads exactly `n` bytes. Returns false on premature EOF.
  bool read_exact(std::size_t n, std::string& out);

 private:
  bool fill();
  void close();

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::vector<char> buffer_;
  std::size_t begin_ = 0;
  std::size_t end_ = 0;
};

}  // namespace staledoc
