// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The utdebug Authors

#include "subprocess.hpp"

#include <array>
#include <cerrno>
#include <csignal>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace utdebug::detail {

namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    reset(o.release());
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

 private:
  int fd_ = -1;
};

bool make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) return false;
  read_end.reset(fds[0]);
  write_end.reset(fds[1]);
  return true;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          std::chrono::milliseconds deadline) {
  using Clock = std::chrono::steady_clock;
  ProcessResult result;
  Fd in_r, in_w, out_r, out_w, err_r, err_w;
  if (!make_pipe(in_r, in_w) || !make_pipe(out_r, out_w) || !make_pipe(err_r, err_w)) return result;

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const auto start = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) return result;
  if (pid == 0) {
    // Child: async-signal-safe calls only.
    ::setpgid(0, 0);
    ::dup2(in_r.get(), 0);
    ::dup2(out_w.get(), 1);
    ::dup2(err_w.get(), 2);
    ::execvp(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  result.spawned = true;
  in_r.reset();
  out_w.reset();
  err_w.reset();
  ::fcntl(in_w.get(), F_SETFL, O_NONBLOCK);

  std::size_t written = 0;
  if (input.empty()) in_w.reset();
  std::array<char, 8192> buf{};
  const auto limit = start + deadline;

  while (out_r.get() >= 0 || err_r.get() >= 0) {
    const auto now = Clock::now();
    if (now >= limit) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      result.killed_on_deadline = true;
      break;
    }
    const int wait_ms =
        static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(limit - now).count()) + 1;
    std::array<pollfd, 3> pfds{};
    nfds_t n = 0;
    int out_idx = -1, err_idx = -1, in_idx = -1;
    if (out_r.get() >= 0) { pfds[n] = {out_r.get(), POLLIN, 0}; out_idx = static_cast<int>(n++); }
    if (err_r.get() >= 0) { pfds[n] = {err_r.get(), POLLIN, 0}; err_idx = static_cast<int>(n++); }
    if (in_w.get() >= 0) { pfds[n] = {in_w.get(), POLLOUT, 0}; in_idx = static_cast<int>(n++); }
    const int rc = ::poll(pfds.data(), n, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (in_idx >= 0 && pfds[in_idx].revents) {
      if (pfds[in_idx].revents & (POLLERR | POLLHUP)) {
        in_w.reset();
      } else {
        const ssize_t w = ::write(in_w.get(), input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        else if (w < 0 && errno != EAGAIN && errno != EINTR) in_w.reset();
        if (written >= input.size()) in_w.reset();
      }
    }
    auto drain = [&](int idx, Fd& fd, std::string& sink) {
      if (idx < 0 || !pfds[idx].revents) return;
      const ssize_t r = ::read(fd.get(), buf.data(), buf.size());
      if (r > 0) sink.append(buf.data(), static_cast<std::size_t>(r));
      else if (r == 0 || (errno != EAGAIN && errno != EINTR)) fd.reset();
    };
    drain(out_idx, out_r, result.out);
    drain(err_idx, err_r, result.err);
  }
  in_w.reset();

  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid || (r < 0 && errno != EINTR)) break;
    if (Clock::now() >= limit && !result.killed_on_deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      result.killed_on_deadline = true;
    }
    ::usleep(1000);
  }
  // Reap anything the candidate left behind in its group.
  ::kill(-pid, SIGKILL);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) result.term_signal = WTERMSIG(status);
  result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return result;
}

}  // namespace utdebug::detail
