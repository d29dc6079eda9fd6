#pragma once

#include <cstdint>
#include <vector>

#include "sptrsv/arch.hpp"
#include "sptrsv/graph.hpp"
#include "sptrsv/schedule.hpp"

namespace sptrsv {

struct SchedulerOptions {
    Dataflow dataflow = Dataflow::Medium;
    bool icr = true;
    /// Partial-sum file slots available for parked rows. -1 = full file
    /// (2^K); 0 disables row swapping entirely (the CU stays on its current
    /// row until it is solved).
    std::int32_t psum_capacity = -1;
    /// Rows assumed solved before cycle 1 (their x values are free operands).
    /// Used to schedule sub-problems in isolation; the compile pipeline never
    /// sets this.
    std::vector<std::int32_t> presolved;
};

/// Round-robin node-to-CU assignment in ascending node order, skipping
/// presolved nodes. Returns -1 for presolved entries.
std::vector<std::int32_t> allocate_nodes(const SolveDag& dag, std::int32_t cu_count,
                                         const std::vector<std::uint8_t>& presolved_mask);

/// Cycle-accurate list scheduler for the chosen dataflow. Conflict-free
/// timing: every edge may execute the cycle after its source row solves;
/// operand-bank ports are not modeled here (see resolve_conflicts).
Schedule build_schedule(const SolveDag& dag, const ArchConfig& arch, const SchedulerOptions& opt);

/// One round-based edge-selection step (the per-cycle reorder pass).
/// candidates[cu] holds the source rows of the edges CU cu could compute this
/// cycle (its selected row's available, uncomputed in-edges), sorted
/// ascending and duplicate-free. Returns the chosen source per CU, -1 where
/// the candidate set is empty. Each round picks the source shared by the most
/// undecided CUs, breaking ties by the lower count over the full input, then
/// by the smaller row id.
std::vector<std::int32_t> icr_select(const std::vector<std::vector<std::int32_t>>& candidates);

}  // namespace sptrsv
