#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sptrsv/isa.hpp"

namespace sptrsv {

/// Statistics and solution from one cycle-level machine run.
struct SimReport {
    std::int64_t total_cycles = 0;
    std::vector<std::int64_t> executes_per_cu;
    std::vector<std::int64_t> nops_per_cu;
    /// Idle cycles summed over units, indexed by NopTag (from the sidecar).
    std::array<std::int64_t, 4> nop_breakdown{0, 0, 0, 0};
    /// (2*nnz - n) operations over the run's wall time at the modeled clock.
    double throughput_gops = 0.0;
    /// Reads saved by same-cycle grouping: for every value consumed by k
    /// units in one cycle, k-1 file accesses were avoided.
    std::int64_t reuse = 0;
    /// Peak number of simultaneously valid slots in any solution-file bank.
    std::int64_t max_residency = 0;
    /// Total data-memory writes across units (one per solved row).
    std::int64_t dm_writes = 0;
    /// Solution vector in row order, reconstructed through out_perm.
    std::vector<float> x;
};

/// Execute a program cycle by cycle on the modeled machine: feedback PEs,
/// banked solution/partial-sum files with priority-encoder write addressing,
/// counter-addressed per-unit data memories, stream FIFOs, and the two
/// crossbars. Throws Error with cycle/unit diagnostics on any illegal access
/// (stream underflow/overflow, full-file write, invalid-slot read, crossbar
/// contention) — all of which indicate a compiler bug, not a user error.
SimReport run_program(const Program& p);

}  // namespace sptrsv
