#include "sptrsv/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <utility>

namespace sptrsv {

std::int64_t grouped_read_savings(const Schedule& s) {
    std::vector<std::pair<std::int64_t, std::int32_t>> reads;  // (cycle, source)
    for (const auto& cu : s.cus)
        for (const auto& e : cu.execs)
            if (e.source >= 0) reads.emplace_back(e.cycle, e.source);
    std::sort(reads.begin(), reads.end());
    std::int64_t saved = 0;
    for (std::size_t i = 1; i < reads.size(); ++i)
        if (reads[i] == reads[i - 1]) ++saved;
    return saved;
}

CompileResult compile_matrix(const CsrMatrix& m, const Rhs& b, const CompileOptions& opt,
                             const std::string& name) {
    opt.arch.validate();
    if (opt.sched.psum_capacity > (std::int64_t{1} << 20))
        throw Error("psum capacity override is beyond any configurable file size");

    const auto t0 = std::chrono::steady_clock::now();
    CompileResult out;
    out.arch = opt.arch;

    SolveDag dag = build_dag(m);
    out.binary_nodes = binary_node_count(m);
    out.cdu = cdu_metrics(dag, opt.arch.cu_count);
    out.peak_gops = peak_throughput_gops(m.n, m.nnz, opt.arch.cu_count, opt.arch.clock_hz);

    // Size the per-unit memories before scheduling: the node allocation is
    // deterministic, so the row census here matches the schedule's.
    std::vector<std::uint8_t> presolved_mask(dag.node_count, 0);
    for (std::int32_t v : opt.sched.presolved) presolved_mask[v] = 1;
    std::vector<std::int32_t> assignment =
        allocate_nodes(dag, opt.arch.cu_count, presolved_mask);
    std::vector<std::int64_t> rows_per_cu(opt.arch.cu_count, 0);
    for (std::int32_t v = 0; v < dag.node_count; ++v)
        if (assignment[v] >= 0) ++rows_per_cu[assignment[v]];
    const std::int64_t max_rows =
        *std::max_element(rows_per_cu.begin(), rows_per_cu.end());
    if (max_rows > out.arch.dm_words()) {
        if (!opt.auto_size)
            throw Error("data memory too small: a unit owns " + std::to_string(max_rows) +
                        " rows but holds 2^" + std::to_string(out.arch.t_log2) + " words");
        while (max_rows > out.arch.dm_words() && out.arch.t_log2 < 26) ++out.arch.t_log2;
        out.warnings.push_back("data-memory address width raised to T=" +
                               std::to_string(out.arch.t_log2) + " to fit " +
                               std::to_string(max_rows) + " rows on one unit");
    }
    if (opt.sched.psum_capacity > out.arch.psum_words()) {
        if (!opt.auto_size)
            throw Error("psum capacity override " + std::to_string(opt.sched.psum_capacity) +
                        " exceeds the file (2^" + std::to_string(out.arch.k_log2) + " words)");
        while (opt.sched.psum_capacity > out.arch.psum_words() && out.arch.k_log2 < 20)
            ++out.arch.k_log2;
        out.warnings.push_back("psum address width raised to K=" +
                               std::to_string(out.arch.k_log2) + " to fit a capacity of " +
                               std::to_string(opt.sched.psum_capacity));
    }
    out.arch.validate();

    Schedule sched = build_schedule(dag, out.arch, opt.sched);
    out.schedule_cycles = sched.total_cycles;
    out.load_balance = load_balance_degree(sched.assignment, dag, out.arch.cu_count);
    out.execute_count = sched.execute_count();

    ConstraintGraph cg = build_constraints(sched, dag);
    out.constraints = static_cast<std::int64_t>(cg.read_edges.size());

    if (out.arch.ideal_mode) {
        out.total_cycles = sched.total_cycles;
        out.nop_breakdown = sched.nop_breakdown();
        out.reuse = grouped_read_savings(sched);
    } else {
        BankPlan banks = color_banks(cg, sched, dag, out.arch.cu_count);
        out.overflow_nodes = banks.overflow_nodes;
        out.residual_read_conflicts = banks.residual_read_conflicts;
        out.residual_write_conflicts = banks.residual_write_conflicts;
        Schedule resolved = resolve_conflicts(sched, dag, banks);
        RegisterPlan regs = allocate_registers(resolved, dag, banks, out.arch);
        out.spill_count = regs.spill_count;
        out.reload_count = static_cast<std::int64_t>(regs.reloads.size());
        out.max_residency = regs.max_residency;
        out.total_cycles = regs.sched.total_cycles;
        out.nop_breakdown = regs.sched.nop_breakdown();
        out.reuse = grouped_read_savings(regs.sched);
        out.program = emit_program(dag, m, b, banks, regs, out.arch, name);
        out.emitted = true;
        ProgramCheck chk = validate_program(out.program);
        for (auto& w : chk.warnings) out.warnings.push_back(std::move(w));
    }

    if (out.total_cycles > 0) {
        const double ops = 2.0 * static_cast<double>(m.nnz) - m.n;
        out.throughput_gops =
            ops / (static_cast<double>(out.total_cycles) / out.arch.clock_hz) / 1e9;
    }
    out.compile_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace sptrsv
