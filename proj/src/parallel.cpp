#include "pcw/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

extern "C" void openblas_set_num_threads(int);

namespace pcw {
namespace {

std::atomic<int> g_override{0};

int fromEnvironment() {
  const char* value = std::getenv("PCW_THREADS");
  if (value == nullptr) return 0;
  try {
    int n = std::stoi(value);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

}  // namespace

int workerCount() {
  if (int n = g_override.load(); n > 0) return n;
  if (int n = fromEnvironment(); n > 0) return n;
  return omp_get_max_threads();
}

void setWorkerCount(int count) { g_override.store(count > 0 ? count : 0); }

void pinBlasThreads() {
  static const bool once = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)once;
}

}  // namespace pcw
