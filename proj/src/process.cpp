#include "staledoc/process.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <system_error>
#include <unistd.h>

extern char** environ;

namespace staledoc {
namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

[[noreturn]] void throw_errno(const char* what) {
  throw std::system_error(errno, std::generic_category(), what);
}

struct Pipe {
  int read_end = -1;
  int write_end = -1;

  Pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw_errno("pipe2");
    read_end = fds[0];
    write_end = fds[1];
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (read_end >= 0) ::close(read_end);
    read_end = -1;
  }
  void close_write() {
    if (write_end >= 0) ::close(write_end);
    write_end = -1;
  }
};

// Owns the strings backing an argv/envp array for posix_spawn.
class CStringArray {
 public:
  explicit CStringArray(std::vector<std::string> items) : items_(std::move(items)) {
    for (auto& s : items_) ptrs_.push_back(s.data());
    ptrs_.push_back(nullptr);
  }
  char* const* data() { return ptrs_.data(); }

 private:
  std::vector<std::string> items_;
  std::vector<char*> ptrs_;
};

CStringArray build_env(const EnvOverrides& overrides) {
  std::vector<std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    auto eq = entry.find('=');
    auto key = entry.substr(0, eq);
    bool replaced = std::any_of(overrides.begin(), overrides.end(),
                                [&](const auto& kv) { return kv.first == key; });
    if (!replaced) env.emplace_back(entry);
  }
  for (const auto& [k, v] : overrides) env.push_back(k + "=" + v);
  return CStringArray(std::move(env));
}

pid_t spawn(const std::vector<std::string>& argv, const EnvOverrides& env, int stdin_fd,
            int stdout_fd, int stderr_fd) {
  ignore_sigpipe_once();
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, stdin_fd, STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, stdout_fd, STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, stderr_fd, STDERR_FILENO);

  CStringArray args(argv);
  CStringArray envp = build_env(env);
  pid_t pid = -1;
  int rc = posix_spawnp(&pid, argv.front().c_str(), &actions, nullptr, args.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw std::system_error(rc, std::generic_category(), "posix_spawnp " + argv.front());
  return pid;
}

int wait_for(pid_t pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw_errno("waitpid");
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const EnvOverrides& env,
                          std::string_view stdin_data) {
  if (argv.empty()) throw std::invalid_argument("run_process: empty argv");
  Pipe in, out, err;
  pid_t pid = spawn(argv, env, in.read_end, out.write_end, err.write_end);
  in.close_read();
  out.close_write();
  err.close_write();

  ProcessResult result;
  std::size_t written = 0;
  if (stdin_data.empty()) in.close_write();
  std::array<char, 65536> chunk{};

  while (out.read_end >= 0 || err.read_end >= 0) {
    std::vector<pollfd> fds;
    if (out.read_end >= 0) fds.push_back({out.read_end, POLLIN, 0});
    if (err.read_end >= 0) fds.push_back({err.read_end, POLLIN, 0});
    if (in.write_end >= 0) fds.push_back({in.write_end, POLLOUT, 0});
    if (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      throw_errno("poll");
    }
    for (const auto& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in.write_end) {
        ssize_t n = ::write(p.fd, stdin_data.data() + written, stdin_data.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 || written == stdin_data.size()) in.close_write();
        continue;
      }
      ssize_t n = ::read(p.fd, chunk.data(), chunk.size());
      if (n > 0) {
        (p.fd == out.read_end ? result.out : result.err).append(chunk.data(), n);
      } else if (n == 0 || errno != EINTR) {
        if (p.fd == out.read_end) out.close_read();
        else err.close_read();
      }
    }
  }
  in.close_write();
  result.exit_code = wait_for(pid);
  return result;
}

PipedProcess::PipedProcess(const std::vector<std::string>& argv) : buffer_(1 << 16) {
  if (argv.empty()) throw std::invalid_argument("PipedProcess: empty argv");
  Pipe in, out;
  int devnull = ::open("/dev/null", O_WRONLY | O_CLOEXEC);
  if (devnull < 0) throw_errno("open /dev/null");
  try {
    pid_ = spawn(argv, {}, in.read_end, out.write_end, devnull);
  } catch (...) {
    ::close(devnull);
    throw;
  }
  ::close(devnull);
  in_fd_ = in.write_end;
  out_fd_ = out.read_end;
  in.write_end = -1;
  out.read_end = -1;
}

PipedProcess::~PipedProcess() { close(); }

PipedProcess::PipedProcess(PipedProcess&& other) noexcept
    : pid_(std::exchange(other.pid_, -1)),
      in_fd_(std::exchange(other.in_fd_, -1)),
      out_fd_(std::exchange(other.out_fd_, -1)),
      buffer_(std::move(other.buffer_)),
      begin_(std::exchange(other.begin_, 0)),
      end_(std::exchange(other.end_, 0)) {}

PipedProcess& PipedProcess::operator=(PipedProcess&& other) noexcept {
  if (this != &other) {
    close();
    pid_ = std::exchange(other.pid_, -1);
    in_fd_ = std::exchange(other.in_fd_, -1);
    out_fd_ = std::exchange(other.out_fd_, -1);
    buffer_ = std::move(other.buffer_);
    begin_ = std::exchange(other.begin_, 0);
    end_ = std::exchange(other.end_, 0);
  }
  return *this;
}

void PipedProcess::close() {
  if (in_fd_ >= 0) ::close(in_fd_);
  in_fd_ = -1;
  if (out_fd_ >= 0) ::close(out_fd_);
  out_fd_ = -1;
  if (pid_ > 0) {
    try {
      wait_for(pid_);
    } catch (...) {
    }
  }
  pid_ = -1;
}

void PipedProcess::write(std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(in_fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("write to child");
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

bool PipedProcess::fill() {
  if (begin_ == end_) begin_ = end_ = 0;
  if (end_ == buffer_.size()) {
    if (begin_ > 0) {
      std::memmove(buffer_.data(), buffer_.data() + begin_, end_ - begin_);
      end_ -= begin_;
      begin_ = 0;
    } else {
      buffer_.resize(buffer_.size() * 2);
    }
  }
  for (;;) {
    ssize_t n = ::read(out_fd_, buffer_.data() + end_, buffer_.size() - end_);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    end_ += static_cast<std::size_t>(n);
    return true;
  }
}

bool PipedProcess::read_line(std::string& line) {
  line.clear();
  for (;;) {
    auto* first = buffer_.data() + begin_;
    auto* last = buffer_.data() + end_;
    auto* nl = std::find(first, last, '\n');
    if (nl != last) {
      line.append(first, nl);
      begin_ += static_cast<std::size_t>(nl - first) + 1;
      return true;
    }
    line.append(first, last);
    begin_ = end_;
    if (!fill()) return false;
  }
}

bool PipedProcess::read_exact(std::size_t n, std::string& out) {
  out.clear();
  out.reserve(n);
  while (out.size() < n) {
    if (begin_ == end_ && !fill()) return false;
    std::size_t take = std::min(n - out.size(), end_ - begin_);
    out.append(buffer_.data() + begin_, take);
    begin_ += take;
  }
  return true;
}

}  // namespace staledoc
