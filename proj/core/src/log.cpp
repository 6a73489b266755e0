#include "cbmf/log.hpp"

#include <cstdio>
#include <cstdlib>

namespace cbmf {

int log_level() {
  static int level = [] {
    const char* env = std::getenv("CBMF_LOG");
    if (!env || !*env) return 1;
    return std::atoi(env);
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "[cbmf] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::fprintf(stderr, "[cbmf] %s\n", msg.c_str());
}

}  // namespace cbmf
