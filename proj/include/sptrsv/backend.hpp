#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sptrsv/arch.hpp"
#include "sptrsv/graph.hpp"
#include "sptrsv/isa.hpp"
#include "sptrsv/matrix.hpp"
#include "sptrsv/schedule.hpp"

namespace sptrsv {

/// Rows whose solution values are consumed in the same cycle must live in
/// different register banks. read_edges is the reported "constraints" count;
/// several units consuming one broadcast value count as a single readout and
/// add no edge. write_edges additionally separates rows completed in the same
/// cycle (their deliveries share a bank's single write port) — tracked for
/// port safety, not included in the constraints metric.
struct ConstraintGraph {
    std::int32_t node_count = 0;
    std::vector<std::pair<std::int32_t, std::int32_t>> read_edges;
    std::vector<std::pair<std::int32_t, std::int32_t>> write_edges;
};

ConstraintGraph build_constraints(const Schedule& s, const SolveDag& dag);

/// bank[v] = register bank (unit index) storing x[v]. Rows whose neighborhood
/// exhausted every color get the least-used color among their neighbors;
/// the co-access events that remain are counted as residual conflicts.
struct BankPlan {
    std::vector<std::int32_t> bank;
    std::int64_t overflow_nodes = 0;
    std::int64_t residual_read_conflicts = 0;
    std::int64_t residual_write_conflicts = 0;
};

BankPlan color_banks(const ConstraintGraph& g, const Schedule& s, const SolveDag& dag,
                     std::int32_t cu_count);

/// Re-time the schedule so no cycle reads two different rows from one bank or
/// writes one bank twice. Executions only move later (never earlier), unit
/// order per row is preserved, and the higher-indexed unit is the one that
/// stalls; vacated slots become bank-blocked idles. With no residual
/// conflicts the schedule is returned unchanged.
Schedule resolve_conflicts(const Schedule& s, const SolveDag& dag, const BankPlan& banks);

/// Placement of one data-memory fetch that restores a spilled value to its
/// bank before the next consumer reads it.
struct Reload {
    std::int64_t cycle = 0;
    std::int32_t node = 0;
    bool operator==(const Reload&) const = default;
};

/// Live-range plan for the per-bank solution files: which completions are
/// actually stored (rows nobody reads skip the register write), which
/// readouts free their slot, where spilled values are refetched, and the
/// schedule stretched by any stall columns inserted when no cycle had free
/// ports for a refetch.
struct RegisterPlan {
    Schedule sched;
    std::vector<Reload> reloads;                   // cycle-ascending
    std::vector<std::uint8_t> delivered;           // node -> stored in a bank at completion
    std::unordered_set<std::int64_t> releasing;    // keys cycle*cu_count+bank of freeing readouts
    std::int64_t spill_count = 0;
    std::int64_t max_residency = 0;                // peak live values in any bank
};

RegisterPlan allocate_registers(const Schedule& s, const SolveDag& dag, const BankPlan& banks,
                                const ArchConfig& cfg);

/// Lower the finished plan to instruction words, per-unit L/b streams, the
/// data-memory output permutation and the idle-tag sidecar. Throws when a
/// required address exceeds its field width (configuration too small).
Program emit_program(const SolveDag& dag, const CsrMatrix& m, const Rhs& b,
                     const BankPlan& banks, const RegisterPlan& regs, const ArchConfig& cfg,
                     const std::string& matrix_name);

}  // namespace sptrsv
