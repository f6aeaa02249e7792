#pragma once

namespace taxhedge {

enum class Execution { serial, parallel };

// Worker count for parallel kernels: omp_get_max_threads(), capped by the
// TAXHEDGE_THREADS environment variable when set to a positive integer.
int worker_threads();

} // namespace taxhedge
