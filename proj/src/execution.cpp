#include "taxhedge/execution.hpp"

#include <omp.h>

#include <cstdlib>

namespace taxhedge {

int worker_threads() {
    int n = omp_get_max_threads();
    if (const char* cap = std::getenv("TAXHEDGE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(cap, &end, 10);
        if (end != cap && *end == '\0' && v > 0 && v < n) n = static_cast<int>(v);
    }
    return n < 1 ? 1 : n;
}

} // namespace taxhedge
