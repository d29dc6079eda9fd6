#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace sptrsv {

enum class Dataflow : std::uint8_t { Coarse, Medium };

/// Tags describing why a CU issued no edge computation in a cycle.
///   Bnop - operand bank (or port) conflict, injected by conflict resolution
///   Pnop - partial-sum file full, CU cannot swap to another row
///   Dnop - waiting on a dependency (no computable edge on any eligible row)
///   Lnop - all rows owned by this CU are solved
enum class NopTag : std::uint8_t { Bnop = 0, Pnop = 1, Dnop = 2, Lnop = 3 };

enum class PsumSource : std::uint8_t {
    Zero,      // start a fresh accumulation
    Feedback,  // continue the sum kept in the PE feedback register
    File       // resume a sum parked in the partial-sum file (read releases it)
};

/// One PE-active cycle. source >= 0 is an edge contribution
/// (psum + L[node][source] * x[source]); source == -1 is the row solve
/// ((b[node] - psum) * 1/L[node][node]), which completes the node.
/// write_node >= 0 means the feedback sum of that (preempted) row is written
/// to the partial-sum file in the same cycle.
struct ExecAction {
    std::int64_t cycle = 0;  // 1-based
    std::int32_t node = -1;
    std::int32_t source = -1;
    PsumSource psum_src = PsumSource::Zero;
    std::int32_t write_node = -1;
};

struct NopRun {
    NopTag tag;
    std::int64_t count;
};

/// Per-CU program: executes in cycle order plus run-length-encoded nop tags
/// filling every remaining cycle up to Schedule::total_cycles. Walking cycles
/// 1..total while consuming both streams reconstructs the full timeline.
struct CuSchedule {
    std::vector<std::int32_t> tasks;  // owned nodes, ascending
    std::vector<ExecAction> execs;
    std::vector<NopRun> nops;
};

struct Schedule {
    std::int32_t node_count = 0;
    std::int64_t total_cycles = 0;
    Dataflow dataflow = Dataflow::Medium;
    bool icr = false;
    std::int32_t psum_capacity = 0;
    std::vector<std::int32_t> assignment;  // node -> CU, -1 for presolved nodes
    std::vector<std::int64_t> completion;  // node -> solve cycle, 0 if presolved
    std::vector<CuSchedule> cus;

    std::int64_t execute_count() const {
        std::int64_t total = 0;
        for (const auto& cu : cus) total += static_cast<std::int64_t>(cu.execs.size());
        return total;
    }

    /// Nop cycles summed over CUs, split by tag (indexed by NopTag).
    std::array<std::int64_t, 4> nop_breakdown() const {
        std::array<std::int64_t, 4> out{0, 0, 0, 0};
        for (const auto& cu : cus)
            for (const auto& run : cu.nops) out[static_cast<int>(run.tag)] += run.count;
        return out;
    }
};

}  // namespace sptrsv
