#ifndef SLTERR_TESTS_TEST_UTIL_H_
#define SLTERR_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "slterr/corpus.h"
#include "slterr/text_io.h"

namespace slterr::testing {

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("slterr-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Tokens T(std::string_view s) { return SplitTokens(s); }

// The surgeons example used throughout the tests.
inline Quintuplet SurgeonsQuintuplet() {
  Quintuplet q;
  q.utt_id = "0";
  q.f_hyp = T("les chirurgiens de los angeles on dit");
  q.f_ref = T("les chirurgiens de los angeles ont dit");
  q.e_mt = T("surgeons in los angeles have said");
  q.e_slt = T("surgeons in los angeles it is said");
  q.e_ref = T("the surgeons of los angeles said");
  return q;
}

struct CliResult {
  int code = 0;
  std::string out, err;
};

inline CliResult RunCli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::Run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string Slurp(const std::filesystem::path& p) { return ReadFile(p); }

}  // namespace slterr::testing

#endif  // SLTERR_TESTS_TEST_UTIL_H_
