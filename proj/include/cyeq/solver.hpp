/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyeq {

struct SolverUnavailable : std::runtime_error {
  explicit SolverUnavailable(const std::string& what) : std::runtime_error(what) {}
};

struct SolverResult {
  enum class Kind { Unsat, Sat, Unknown };
  Kind kind = Kind::Unknown;
  std::string output;
};

namespace solverdetail {

inline std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> argv;
  std::istringstream is(command);
  std::string tok;
  while (is >> tok) argv.push_back(tok);
  return argv;
}

}  // namespace solverdetail

/// Runs the solver command with the script on stdin and reads the first token
/// of stdout: "sat", "unsat" or "unknown". The command is whitespace-split
/// into argv (no shell). Timeouts kill the process and report Unknown.
inline SolverResult run_solver(const std::string& command, const std::string& script,
                               int timeoutMs) {
  std::vector<std::string> argv = solverdetail::split_command(command);
  if (argv.empty()) throw SolverUnavailable("empty solver command");

  int inPipe[2], outPipe[2], errPipe[2];
  if (pipe(inPipe) || pipe(outPipe) || pipe(errPipe)) {
    throw SolverUnavailable("pipe() failed");
  }
  // exec-failure channel: written (then closed) only if execvp fails
  fcntl(errPipe[1], F_SETFD, FD_CLOEXEC);

  pid_t pid = fork();
  if (pid < 0) throw SolverUnavailable("fork() failed");
  if (pid == 0) {
    dup2(inPipe[0], STDIN_FILENO);
    dup2(outPipe[1], STDOUT_FILENO);
    close(inPipe[0]);
    close(inPipe[1]);
    close(outPipe[0]);
    close(outPipe[1]);
    close(errPipe[0]);
    std::vector<char*> cargv;
    for (auto& a : argv) cargv.push_back(a.data());
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    char err = 1;
    ssize_t ignored = write(errPipe[1], &err, 1);
    (void)ignored;
    _exit(127);
  }
  close(inPipe[0]);
  close(outPipe[1]);
  close(errPipe[1]);

  // Write the script; the child may exit early, so ignore EPIPE.
  signal(SIGPIPE, SIG_IGN);
  size_t off = 0;
  while (off < script.size()) {
    ssize_t n = write(inPipe[1], script.data() + off, script.size() - off);
    if (n <= 0) break;
    off += size_t(n);
  }
  close(inPipe[1]);

  std::string out;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeoutMs);
  bool timedOut = false;
  char buf[4096];
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    int waitMs = int(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    if (waitMs <= 0) {
      timedOut = true;
      break;
    }
    struct pollfd pfd{outPipe[0], POLLIN, 0};
    int rc = poll(&pfd, 1, waitMs);
    if (rc <= 0) {
      timedOut = rc == 0;
      break;
    }
    ssize_t n = read(outPipe[0], buf, sizeof buf);
    if (n <= 0) break;
    out.append(buf, size_t(n));
  }
  close(outPipe[0]);

  if (timedOut) {
    kill(pid, SIGKILL);
  }
  int status = 0;
  waitpid(pid, &status, 0);

  char execFailed = 0;
  ssize_t n = read(errPipe[0], &execFailed, 1);
  close(errPipe[0]);
  if (n == 1 && execFailed) {
    throw SolverUnavailable("cannot execute solver: " + argv[0]);
  }

  SolverResult result;
  result.output = out;
  if (timedOut) {
    result.kind = SolverResult::Kind::Unknown;
    result.output = "timeout";
    return result;
  }
  std::istringstream is(out);
  std::string first;
  is >> first;
  if (first == "unsat") result.kind = SolverResult::Kind::Unsat;
  else if (first == "sat") result.kind = SolverResult::Kind::Sat;
  else result.kind = SolverResult::Kind::Unknown;
  if (out.empty() && WIFEXITED(status) && WEXITSTATUS(status) == 127) {
    throw SolverUnavailable("solver exited before producing output: " + argv[0]);
  }
  return result;
}

/// Solver command resolution: explicit configuration, then the CYEQ_SOLVER
/// environment variable, then a z3 binary on PATH.
inline std::string default_solver_command(const std::string& configured) {
  if (!configured.empty()) return configured;
  const char* env = std::getenv("CYEQ_SOLVER");
  if (env && *env) return env;
  return "z3 -in";
}

}  // namespace cyeq
