#include "frest/parallel.hpp"

#include <cstdlib>
#include <string>

namespace frest {

int thread_cap() {
  static const int cap = [] {
    const char* env = std::getenv("FREST_THREADS");
    if (env == nullptr) return 1;
    try {
      const int v = std::stoi(env);
      if (v < 1) return 1;
      return std::min(v, 64);
    } catch (...) {
      return 1;
    }
  }();
  return cap;
}

}  // namespace frest
