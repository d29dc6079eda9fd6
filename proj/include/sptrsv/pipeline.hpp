#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sptrsv/arch.hpp"
#include "sptrsv/backend.hpp"
#include "sptrsv/graph.hpp"
#include "sptrsv/isa.hpp"
#include "sptrsv/matrix.hpp"
#include "sptrsv/scheduler.hpp"

namespace sptrsv {

struct CompileOptions {
    ArchConfig arch;
    SchedulerOptions sched;
    /// Raise t_log2 until every unit's rows fit its data-memory window, and
    /// k_log2 when an explicit psum capacity exceeds the file. Off = fail
    /// instead of resizing.
    bool auto_size = true;
};

/// Everything one compile learns about a system. In ideal mode (no structural
/// hazards modeled) the pipeline stops after scheduling: bank conflicts are
/// never retimed and spill stalls never inserted, so there is no executable
/// program and `emitted` is false.
struct CompileResult {
    ArchConfig arch;  // effective configuration after auto-sizing
    bool emitted = false;
    Program program;

    std::int64_t schedule_cycles = 0;  // before conflict resolution
    std::int64_t total_cycles = 0;     // final timeline length
    std::int64_t execute_count = 0;
    std::array<std::int64_t, 4> nop_breakdown{0, 0, 0, 0};  // indexed by NopTag
    std::int64_t constraints = 0;       // same-cycle read-pair edges
    std::int64_t reuse = 0;             // grouped-read savings on the final timeline
    std::int64_t overflow_nodes = 0;    // rows the bank coloring could not separate
    std::int64_t residual_read_conflicts = 0;
    std::int64_t residual_write_conflicts = 0;
    std::int64_t spill_count = 0;
    std::int64_t reload_count = 0;
    std::int64_t max_residency = 0;
    std::int64_t binary_nodes = 0;
    CduMetrics cdu;
    double load_balance = 0.0;
    double peak_gops = 0.0;
    double throughput_gops = 0.0;  // over the final timeline at the modeled clock
    double compile_seconds = 0.0;
    std::vector<std::string> warnings;
};

/// Full compile: dependency graph, schedule, bank assignment, conflict
/// resolution, register planning and instruction emission, with wall-clock
/// timing and the report metrics filled in. The right-hand side is baked into
/// the program's b streams (ignored in ideal mode).
CompileResult compile_matrix(const CsrMatrix& m, const Rhs& b, const CompileOptions& opt,
                             const std::string& name);

/// Reads avoided by same-cycle broadcasts: for every (cycle, source row)
/// consumed by k accumulate steps, k-1 of the k file accesses are saved.
std::int64_t grouped_read_savings(const Schedule& s);

}  // namespace sptrsv
