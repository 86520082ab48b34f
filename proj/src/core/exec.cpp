#include "obeskit/core/exec.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace obeskit::exec {

namespace {
std::atomic<int> g_max_workers{0};  // 0 = not set yet, use hardware default
}

void set_max_workers(int n) { g_max_workers.store(std::max(1, n)); }

int max_workers() {
    int n = g_max_workers.load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace obeskit::exec
