#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#ifndef HHI_TEST_DATA
#error "HHI_TEST_DATA must point at tests/data"
#endif

namespace hhi::testing {

namespace fs = std::filesystem;

inline std::string data_path(const std::string& rel) { return std::string(HHI_TEST_DATA) + "/" + rel; }

#ifdef HHI_SOURCE_DIR
inline std::string source_path(const std::string& rel) { return std::string(HHI_SOURCE_DIR) + "/" + rel; }
#endif

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << body;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "hhi") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string str(const std::string& rel = "") const { return rel.empty() ? path_.string() : (path_ / rel).string(); }

 private:
  fs::path path_;
};

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

#ifdef HHI_CLI_PATH
/// Runs the CLI with `args` (already quoted) from `cwd`, capturing output.
inline RunResult run_cli(const std::string& args, const fs::path& cwd, const fs::path& scratch) {
  const auto out = scratch / ".stdout", err = scratch / ".stderr";
  std::string cmd = "cd " + shell_quote(cwd.string()) + " && " + shell_quote(HHI_CLI_PATH) + " " + args + " >" +
                    shell_quote(out.string()) + " 2>" + shell_quote(err.string());
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}
#endif

}  // namespace hhi::testing
