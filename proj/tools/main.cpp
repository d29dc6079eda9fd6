// Command-line driver: compile sparse lower-triangular systems to accelerator
// programs, execute them on the cycle-level machine model, verify against the
// serial solver, and produce the sweep/comparison tables used for analysis.
//
// Exit codes: 0 success, 1 verification/compile/simulation failure, 2 input
// error (unreadable or malformed files, bad flags or configuration).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sptrsv/gen.hpp"
#include "sptrsv/graph.hpp"
#include "sptrsv/matrix.hpp"
#include "sptrsv/oracle.hpp"
#include "sptrsv/pipeline.hpp"
#include "sptrsv/simulator.hpp"

namespace {

using nlohmann::ordered_json;
using namespace sptrsv;

constexpr int kSchemaVersion = 1;

struct CommonFlags {
    std::int32_t cu_count = 64;
    std::int32_t m_log2 = 6;
    std::int32_t k_log2 = 3;
    std::int32_t t_log2 = 7;
    double clock_hz = 150e6;
    bool ideal = false;
    std::string dataflow = "medium";
    bool no_icr = false;
    std::int32_t psum_capacity = -1;
    bool strict_lower = false;
    std::string rhs_kind = "ones";
    std::uint64_t rhs_seed = 1;
    std::string rhs_file;

    void add_arch(CLI::App* c) {
        c->add_option("--cu-count", cu_count, "Compute units (crossbar ports)")
            ->capture_default_str();
        c->add_option("--m-log2", m_log2, "log2 of solution-file words per bank")
            ->capture_default_str();
        c->add_option("--k-log2", k_log2, "log2 of partial-sum file words per unit")
            ->capture_default_str();
        c->add_option("--t-log2", t_log2,
                      "log2 of data-memory words per unit (raised automatically to fit)")
            ->capture_default_str();
        c->add_option("--clock-hz", clock_hz, "Modeled clock in Hz")
            ->capture_default_str();
        c->add_flag("--ideal", ideal,
                    "Schedule-level timing only: no bank-conflict stalls or spill "
                    "columns are modeled and no program is emitted");
    }
    void add_sched(CLI::App* c) {
        c->add_option("--dataflow", dataflow, "Task granularity: medium or coarse")
            ->check(CLI::IsMember({"medium", "coarse"}))
            ->capture_default_str();
        c->add_flag("--no-icr", no_icr, "Disable intra-node edge-computation reordering");
        c->add_option("--psum-capacity", psum_capacity,
                      "Partial-sum slots usable for parked rows (-1 = whole file, "
                      "0 = never switch rows)")
            ->capture_default_str();
    }
    void add_input(CLI::App* c) {
        c->add_flag("--strict-lower", strict_lower,
                    "Require the file to already be a valid lower-triangular system "
                    "instead of extracting the lower triangle with a unit diagonal");
        c->add_option("--rhs", rhs_kind, "Right-hand side: ones or random")
            ->check(CLI::IsMember({"ones", "random"}))
            ->capture_default_str();
        c->add_option("--rhs-seed", rhs_seed, "Seed for --rhs random")
            ->capture_default_str();
        c->add_option("--rhs-file", rhs_file, "Read the right-hand side from a file "
                                              "(one value per line; overrides --rhs)");
    }

    CompileOptions options() const {
        CompileOptions opt;
        opt.arch.cu_count = cu_count;
        opt.arch.m_log2 = m_log2;
        opt.arch.k_log2 = k_log2;
        opt.arch.t_log2 = t_log2;
        opt.arch.clock_hz = clock_hz;
        opt.arch.ideal_mode = ideal;
        opt.sched.dataflow = dataflow == "coarse" ? Dataflow::Coarse : Dataflow::Medium;
        opt.sched.icr = !no_icr;
        opt.sched.psum_capacity = psum_capacity;
        return opt;
    }

    Rhs make_rhs(std::int32_t n) const {
        if (!rhs_file.empty()) return load_rhs(rhs_file, n);
        if (rhs_kind == "random") {
            std::mt19937_64 rng(rhs_seed);
            std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
            Rhs b;
            b.b.resize(n);
            for (auto& v : b.b) v = dist(rng);
            return b;
        }
        return ones_rhs(n);
    }
};

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot open " + tmp + " for writing");
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

ordered_json breakdown_json(const CompileResult& r, const std::array<std::int64_t, 4>& nops,
                            std::int64_t executes) {
    const double den =
        static_cast<double>(r.arch.cu_count) * static_cast<double>(r.total_cycles);
    auto share = [&](std::int64_t v) { return den > 0 ? static_cast<double>(v) / den : 0.0; };
    ordered_json b;
    b["exec"] = share(executes);
    b["bnop"] = share(nops[static_cast<int>(NopTag::Bnop)]);
    b["pnop"] = share(nops[static_cast<int>(NopTag::Pnop)]);
    b["dnop"] = share(nops[static_cast<int>(NopTag::Dnop)]);
    b["lnop"] = share(nops[static_cast<int>(NopTag::Lnop)]);
    return b;
}

ordered_json report_json(const std::string& name, std::int32_t n, std::int64_t nnz,
                         const CompileResult& r, const SimReport* sim) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["matrix"] = name;
    j["n"] = n;
    j["nnz"] = nnz;
    j["binary_nodes"] = r.binary_nodes;
    j["cycles"] = sim ? sim->total_cycles : r.total_cycles;
    j["throughput_gops"] = sim ? sim->throughput_gops : r.throughput_gops;
    j["peak_gops"] = r.peak_gops;
    if (sim) {
        std::int64_t execs = 0;
        for (auto e : sim->executes_per_cu) execs += e;
        j["breakdown"] = breakdown_json(r, sim->nop_breakdown, execs);
        j["reuse"] = sim->reuse;
    } else {
        j["breakdown"] = breakdown_json(r, r.nop_breakdown, r.execute_count);
        j["reuse"] = r.reuse;
    }
    j["constraints"] = r.constraints;
    j["compile_seconds"] = r.compile_seconds;
    j["schedule_cycles"] = r.schedule_cycles;
    j["load_balance"] = r.load_balance;
    j["cdu"] = {{"node_pct", r.cdu.cdu_node_ratio},
                {"edge_pct", r.cdu.cdu_edge_ratio},
                {"level_pct", r.cdu.cdu_level_ratio},
                {"edges_per_cdu_node", r.cdu.edges_per_cdu_node}};
    j["overflow_nodes"] = r.overflow_nodes;
    j["residual_read_conflicts"] = r.residual_read_conflicts;
    j["residual_write_conflicts"] = r.residual_write_conflicts;
    j["spills"] = r.spill_count;
    j["reloads"] = r.reload_count;
    j["max_residency"] = sim ? sim->max_residency : r.max_residency;
    j["ideal"] = r.arch.ideal_mode;
    j["arch"] = {{"cu_count", r.arch.cu_count}, {"m_log2", r.arch.m_log2},
                 {"k_log2", r.arch.k_log2},     {"t_log2", r.arch.t_log2},
                 {"clock_hz", r.arch.clock_hz}};
    j["warnings"] = r.warnings;
    return j;
}

void deliver_report(const ordered_json& j, const std::string& report_path) {
    if (report_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_text_atomic(report_path, j.dump(2) + "\n");
        std::cout << "report written to " << report_path << "\n";
    }
}

/// b values in unit-major solve order, mapped back to row order.
Rhs rhs_from_program(const Program& p) {
    Rhs b;
    b.b.assign(p.n, 0.0f);
    std::size_t g = 0;
    for (const auto& stream : p.b_streams)
        for (float v : stream) b.b[p.out_perm[g++]] = v;
    return b;
}

/// Returns true when the solution matches; otherwise prints the worst element.
bool verify_solution(const std::vector<float>& got, const CsrMatrix& m, const Rhs& b) {
    Solution ref = solve_serial(m, b);
    double worst = 0.0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double denom = std::max(1.0, std::abs(static_cast<double>(ref.x[i])));
        const double rel = std::abs(static_cast<double>(got[i]) - ref.x[i]) / denom;
        if (rel > worst) {
            worst = rel;
            worst_i = i;
        }
    }
    if (worst <= 1e-5) return true;
    std::fprintf(stderr,
                 "verification failed: x[%zu] = %.9g, serial oracle %.9g "
                 "(relative error %.3g > 1e-5)\n",
                 worst_i, static_cast<double>(got[worst_i]),
                 static_cast<double>(ref.x[worst_i]), worst);
    return false;
}

// ---------------------------------------------------------------- compile --

struct CompileArgs {
    CommonFlags flags;
    std::string input;
    std::string out;
    std::string report;
};

int cmd_compile(const CompileArgs& a) {
    CsrMatrix m;
    Rhs b;
    try {
        m = load_matrix_market(a.input, !a.flags.strict_lower);
        b = a.flags.make_rhs(m.n);
        a.flags.options().arch.validate();
    } catch (const Error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    }
    try {
        CompileResult r = compile_matrix(m, b, a.flags.options(), stem_of(a.input));
        if (r.emitted) {
            std::string out = a.out;
            if (out.empty())
                out = std::filesystem::path(a.input).replace_extension(".sptv").string();
            write_program(r.program, out);
            std::cout << "program written to " << out << "\n";
        } else if (!a.out.empty()) {
            std::fprintf(stderr, "note: ideal mode emits no program; '%s' not written\n",
                         a.out.c_str());
        }
        deliver_report(report_json(stem_of(a.input), m.n, m.nnz, r, nullptr), a.report);
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "compile error: %s\n", e.what());
        return 1;
    }
}

// -------------------------------------------------------------------- run --

struct RunArgs {
    CommonFlags flags;
    std::string input;
    std::string matrix;  // oracle source when input is a program container
    std::string out;
    std::string report;
    bool no_verify = false;
};

int run_from_container(const RunArgs& a) {
    Program p;
    CsrMatrix m;
    const bool have_matrix = !a.matrix.empty();
    try {
        p = read_program(a.input);
        validate_program(p);
        if (have_matrix) m = load_matrix_market(a.matrix, !a.flags.strict_lower);
    } catch (const Error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    }
    try {
        SimReport sim = run_program(p);
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["matrix"] = p.matrix_name;
        j["n"] = p.n;
        j["nnz"] = p.nnz;
        j["binary_nodes"] = 2 * p.nnz - p.n;
        j["cycles"] = sim.total_cycles;
        j["throughput_gops"] = sim.throughput_gops;
        j["peak_gops"] = peak_throughput_gops(p.n, p.nnz, p.arch.cu_count, p.arch.clock_hz);
        std::int64_t execs = 0;
        for (auto e : sim.executes_per_cu) execs += e;
        const double den = std::max<double>(
            1.0, static_cast<double>(p.arch.cu_count) *
                     static_cast<double>(sim.total_cycles));
        j["breakdown"] = {
            {"exec", execs / den},
            {"bnop", sim.nop_breakdown[0] / den},
            {"pnop", sim.nop_breakdown[1] / den},
            {"dnop", sim.nop_breakdown[2] / den},
            {"lnop", sim.nop_breakdown[3] / den}};
        j["reuse"] = sim.reuse;
        j["constraints"] = nullptr;       // not recorded in the container
        j["compile_seconds"] = nullptr;   // program was compiled elsewhere
        j["max_residency"] = sim.max_residency;
        bool ok = true;
        if (have_matrix && !a.no_verify) ok = verify_solution(sim.x, m, rhs_from_program(p));
        if (have_matrix) j["verified"] = ok && !a.no_verify;
        deliver_report(j, a.report);
        return ok ? 0 : 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "run error: %s\n", e.what());
        return 1;
    }
}

int cmd_run(const RunArgs& a) {
    std::string ext = std::filesystem::path(a.input).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext != ".mtx") return run_from_container(a);

    CsrMatrix m;
    Rhs b;
    try {
        if (a.flags.ideal) throw Error("ideal mode emits no program to run");
        m = load_matrix_market(a.input, !a.flags.strict_lower);
        b = a.flags.make_rhs(m.n);
    } catch (const Error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    }
    try {
        CompileResult r = compile_matrix(m, b, a.flags.options(), stem_of(a.input));
        if (!a.out.empty()) {
            write_program(r.program, a.out);
            std::cout << "program written to " << a.out << "\n";
        }
        SimReport sim = run_program(r.program);
        if (sim.total_cycles != r.total_cycles)
            throw Error("simulated cycle count diverged from the compiled schedule");
        bool ok = true;
        if (!a.no_verify) ok = verify_solution(sim.x, m, b);
        ordered_json j = report_json(stem_of(a.input), m.n, m.nnz, r, &sim);
        if (!a.no_verify) j["verified"] = ok;
        deliver_report(j, a.report);
        return ok ? 0 : 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "run error: %s\n", e.what());
        return 1;
    }
}

// ------------------------------------------------------------- sweep-psum --

struct SweepArgs {
    CommonFlags flags;
    std::vector<std::string> inputs;
    std::vector<std::int32_t> capacities{0, 1, 2, 4, 8};
    std::string csv;
};

struct BatchItem {
    std::string rows;
    std::string error;
    bool input_error = false;
};

int emit_batch(const std::vector<BatchItem>& items, const std::string& header,
               const std::string& csv_path) {
    bool input_err = false, failed = false;
    std::string body;
    for (const auto& it : items) {
        if (!it.error.empty()) {
            std::fprintf(stderr, "%s\n", it.error.c_str());
            (it.input_error ? input_err : failed) = true;
        } else {
            body += it.rows;
        }
    }
    if (input_err) return 2;
    if (failed) return 1;
    const std::string text = header + body;
    if (csv_path.empty())
        std::cout << text;
    else {
        write_text_atomic(csv_path, text);
        std::cout << "table written to " << csv_path << "\n";
    }
    return 0;
}

int cmd_sweep(const SweepArgs& a) {
    if (a.capacities.empty()) {
        std::fprintf(stderr, "input error: no capacities given\n");
        return 2;
    }
    std::vector<BatchItem> items(a.inputs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::size_t i = 0; i < a.inputs.size(); ++i) {
        BatchItem& item = items[i];
        try {
            CsrMatrix m;
            try {
                m = load_matrix_market(a.inputs[i], !a.flags.strict_lower);
            } catch (const Error& e) {
                item.error = std::string("input error: ") + e.what();
                item.input_error = true;
                continue;
            }
            const Rhs b = a.flags.make_rhs(m.n);
            const std::string name = stem_of(a.inputs[i]);
            std::vector<std::int64_t> cycles, blocking;
            for (std::int32_t cap : a.capacities) {
                CompileOptions opt = a.flags.options();
                opt.sched.psum_capacity = cap;
                CompileResult r = compile_matrix(m, b, opt, name);
                cycles.push_back(r.total_cycles);
                std::int64_t nops = 0;
                for (std::int64_t v : r.nop_breakdown) nops += v;
                blocking.push_back(nops);
            }
            // First capacity from which blocking never changes again.
            std::size_t plateau = a.capacities.size() - 1;
            while (plateau > 0 && blocking[plateau - 1] == blocking.back()) --plateau;
            std::ostringstream os;
            for (std::size_t c = 0; c < a.capacities.size(); ++c) {
                const double cyc_norm = cycles[0] > 0
                                            ? static_cast<double>(cycles[c]) / cycles[0]
                                            : 1.0;
                const double blk_norm = blocking[0] > 0
                                            ? static_cast<double>(blocking[c]) / blocking[0]
                                            : (blocking[c] == 0 ? 1.0 : 0.0);
                os << name << ',' << a.capacities[c] << ',' << cycles[c] << ','
                   << blocking[c] << ',';
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6g,%.6g", cyc_norm, blk_norm);
                os << buf << ',' << a.capacities[plateau] << '\n';
            }
            item.rows = os.str();
        } catch (const Error& e) {
            item.error = std::string("sweep error (") + a.inputs[i] + "): " + e.what();
        }
    }
    return emit_batch(items,
                      "matrix,capacity,total_cycles,blocking_cycles,total_cycles_norm,"
                      "blocking_norm,plateau_capacity\n",
                      a.csv);
}

// ---------------------------------------------------------------- compare --

struct CompareArgs {
    CommonFlags flags;
    std::vector<std::string> inputs;
    std::string csv;
};

int cmd_compare(const CompareArgs& a) {
    struct Variant {
        const char* name;
        Dataflow df;
        bool icr;
        std::int32_t cap;
    };
    const Variant variants[] = {
        {"coarse", Dataflow::Coarse, false, 0},
        {"medium", Dataflow::Medium, false, 0},
        {"medium_psum", Dataflow::Medium, false, -1},
        {"medium_psum_icr", Dataflow::Medium, true, -1},
    };
    std::vector<BatchItem> items(a.inputs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::size_t i = 0; i < a.inputs.size(); ++i) {
        BatchItem& item = items[i];
        try {
            CsrMatrix m;
            try {
                m = load_matrix_market(a.inputs[i], !a.flags.strict_lower);
            } catch (const Error& e) {
                item.error = std::string("input error: ") + e.what();
                item.input_error = true;
                continue;
            }
            const Rhs b = a.flags.make_rhs(m.n);
            const std::string name = stem_of(a.inputs[i]);
            std::ostringstream os;
            os << name << ',' << m.n << ',' << m.nnz;
            std::string tail;
            CompileResult last;
            for (const Variant& v : variants) {
                CompileOptions opt = a.flags.options();
                opt.sched.dataflow = v.df;
                opt.sched.icr = v.icr;
                opt.sched.psum_capacity = v.cap;
                last = compile_matrix(m, b, opt, name);
                char buf[64];
                std::snprintf(buf, sizeof buf, ",%lld,%.6g",
                              static_cast<long long>(last.total_cycles),
                              last.throughput_gops);
                tail += buf;
            }
            char mid[192];
            std::snprintf(mid, sizeof mid, ",%lld,%.6g,%.6g,%.6g,%.6g,%.6g",
                          static_cast<long long>(last.binary_nodes), last.peak_gops,
                          last.cdu.cdu_node_ratio, last.cdu.cdu_edge_ratio,
                          last.cdu.cdu_level_ratio, last.load_balance);
            os << mid << tail << '\n';
            item.rows = os.str();
        } catch (const Error& e) {
            item.error = std::string("compare error (") + a.inputs[i] + "): " + e.what();
        }
    }
    return emit_batch(items,
                      "matrix,n,nnz,binary_nodes,peak_gops,cdu_node_pct,cdu_edge_pct,"
                      "cdu_level_pct,load_balance_pct,cycles_coarse,gops_coarse,"
                      "cycles_medium,gops_medium,cycles_medium_psum,gops_medium_psum,"
                      "cycles_medium_psum_icr,gops_medium_psum_icr\n",
                      a.csv);
}

// -------------------------------------------------------------------- gen --

struct GenArgs {
    std::string kind = "random-lower";
    std::int32_t n = 100;
    double density = 0.05;
    std::uint64_t seed = 42;
    std::int32_t band = 4;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    try {
        CsrMatrix m;
        if (a.kind == "chain")
            m = gen_chain(a.n);
        else if (a.kind == "fanin") {
            if (a.n < 2) throw Error("fanin needs n >= 2 (n-1 producers and a sink)");
            m = gen_fanin(a.n - 1);
        } else if (a.kind == "diagonal")
            m = gen_diagonal(a.n);
        else if (a.kind == "banded")
            m = gen_banded(a.n, a.band);
        else
            m = gen_random_lower(a.n, a.density, a.seed);
        write_matrix_market(m, a.out);
        std::cout << "wrote " << a.out << " (n=" << m.n << ", nnz=" << m.nnz << ")\n";
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Compiler and cycle-level simulator for a feedback-PE sparse "
        "lower-triangular-solve accelerator.\n"
        "Exit codes: 0 success, 1 verification/compile/run failure, 2 input error."};
    app.require_subcommand(1);

    CompileArgs ca;
    CLI::App* compile = app.add_subcommand(
        "compile", "Compile a Matrix Market system to a program container");
    compile->add_option("input", ca.input, "Matrix Market file")->required();
    compile->add_option("--out", ca.out, "Program container path (default: <input>.sptv)");
    compile->add_option("--report", ca.report, "Write the JSON report here instead of stdout");
    ca.flags.add_arch(compile);
    ca.flags.add_sched(compile);
    ca.flags.add_input(compile);

    RunArgs ra;
    CLI::App* run = app.add_subcommand(
        "run", "Compile (or load) a program, simulate it, and verify the solution");
    run->add_option("input", ra.input, "Matrix Market file (.mtx) or program container")
        ->required();
    run->add_option("--matrix", ra.matrix,
                    "Matrix Market source for oracle verification of a container input");
    run->add_option("--out", ra.out, "Also save the compiled program here");
    run->add_option("--report", ra.report, "Write the JSON report here instead of stdout");
    run->add_flag("--no-verify", ra.no_verify, "Skip the serial-oracle comparison");
    ra.flags.add_arch(run);
    ra.flags.add_sched(run);
    ra.flags.add_input(run);

    SweepArgs sa;
    CLI::App* sweep = app.add_subcommand(
        "sweep-psum", "Recompile per partial-sum capacity and tabulate blocking");
    sweep->add_option("inputs", sa.inputs, "Matrix Market files")->required();
    sweep->add_option("--capacities", sa.capacities, "Capacities to sweep")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--csv", sa.csv, "Write the table here instead of stdout");
    sa.flags.add_arch(sweep);
    sweep->add_flag("--no-icr", sa.flags.no_icr,
                    "Disable intra-node edge-computation reordering");
    sa.flags.add_input(sweep);

    CompareArgs pa;
    CLI::App* compare = app.add_subcommand(
        "compare", "Throughput of coarse/medium/medium+psum/medium+psum+ICR per matrix");
    compare->add_option("inputs", pa.inputs, "Matrix Market files")->required();
    compare->add_option("--csv", pa.csv, "Write the table here instead of stdout");
    pa.flags.add_arch(compare);
    pa.flags.add_input(compare);

    GenArgs ga;
    CLI::App* gen = app.add_subcommand("gen", "Write a synthetic lower-triangular system");
    gen->add_option("--kind", ga.kind, "chain | fanin | diagonal | banded | random-lower")
        ->check(CLI::IsMember({"chain", "fanin", "diagonal", "banded", "random-lower"}))
        ->capture_default_str();
    gen->add_option("--n", ga.n, "Rows")->required();
    gen->add_option("--density", ga.density, "Off-diagonal fill probability (random-lower)")
        ->capture_default_str();
    gen->add_option("--seed", ga.seed, "Generator seed (random-lower)")
        ->capture_default_str();
    gen->add_option("--band", ga.band, "Dependencies per row (banded)")
        ->capture_default_str();
    gen->add_option("--out", ga.out, "Output .mtx path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (app.got_subcommand(compile)) return cmd_compile(ca);
    if (app.got_subcommand(run)) return cmd_run(ra);
    if (app.got_subcommand(sweep)) return cmd_sweep(sa);
    if (app.got_subcommand(compare)) return cmd_compare(pa);
    return cmd_gen(ga);
}
