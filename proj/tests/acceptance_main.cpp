// Runs every acceptance criterion against the packaged configurations and
// prints one PASS/FAIL line per criterion. Exit status 4 if any fails.

#include <cstdio>

#include "sgrocc/acceptance.hpp"

int main() {
  using namespace sgrocc;
  acceptance::Inputs in;
  try {
    in.bench = load_config(std::string(SGROCC_CONFIG_DIR "/bench_room.json"), {});
    in.wall = load_config(std::string(SGROCC_CONFIG_DIR "/wall_heavy.json"), {});
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  int failed = 0;
  const int n = static_cast<int>(acceptance::criteria().size());
  for (int id = 1; id <= n; ++id) {
    const auto r = acceptance::run_one(id, in);
    std::printf("%s\n", acceptance::format_line(r).c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed ? 4 : 0;
}
