#pragma once

namespace pcw {

/// Selects between the serial reference path of a kernel and its OpenMP path.
/// The serial path is what tests compare against; both must produce the same
/// numbers (bitwise for per-item kernels, to roundoff for reductions).
enum class ExecutionPolicy { Serial, Parallel };

/// Worker count for OpenMP regions. PCW_THREADS overrides the OpenMP default;
/// setWorkerCount() overrides both.
int workerCount();
void setWorkerCount(int count);

/// Pins the BLAS backend to a single thread so that per-k results do not
/// depend on how many k-points run concurrently.
void pinBlasThreads();

}  // namespace pcw
