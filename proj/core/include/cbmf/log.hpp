#ifndef CBMF_LOG_HPP
#define CBMF_LOG_HPP

#include <string>

namespace cbmf {

// Verbosity comes from the CBMF_LOG environment variable:
// 0 = silent, 1 = progress (default), 2 = per-epoch detail.
int log_level();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace cbmf

#endif  // CBMF_LOG_HPP
