#include "sptrsv/simulator.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "sptrsv/matrix.hpp"

namespace sptrsv {

namespace {

[[noreturn]] void fail(std::int64_t cycle, std::int32_t cu, const std::string& what) {
    throw Error("cycle " + std::to_string(cycle) + ", unit " + std::to_string(cu) +
                ": " + what);
}

/// One register file bank: valid bits, payloads, and a live-slot count so the
/// priority encoder and residency tracking stay O(1) per access.
struct Bank {
    std::vector<std::uint8_t> valid;
    std::vector<float> value;
    std::int32_t live = 0;

    explicit Bank(std::int32_t words) : valid(words, 0), value(words, 0.0f) {}

    float read(std::int64_t cycle, std::int32_t cu, std::uint32_t addr,
               const char* kind) const {
        if (!valid[addr])
            fail(cycle, cu, std::string(kind) + " read of an empty slot " +
                                std::to_string(addr));
        return value[addr];
    }
    void release(std::uint32_t addr) {
        valid[addr] = 0;
        --live;
    }
    void write(std::int64_t cycle, std::int32_t cu, float v, const char* kind) {
        for (std::size_t s = 0; s < valid.size(); ++s) {
            if (!valid[s]) {
                valid[s] = 1;
                value[s] = v;
                ++live;
                return;
            }
        }
        fail(cycle, cu, std::string("write to a full ") + kind + " file");
    }
};

/// Cursor over one unit's run-length tag sidecar.
struct TagCursor {
    const std::vector<TagRun>* runs = nullptr;
    std::size_t i = 0;
    std::int64_t left = 0;

    std::uint8_t next(std::int64_t cycle, std::int32_t cu) {
        while (left == 0) {
            if (i >= runs->size()) fail(cycle, cu, "tag sidecar ended early");
            left = (*runs)[i].count;
            ++i;
        }
        --left;
        return (*runs)[i - 1].kind;
    }
};

}  // namespace

SimReport run_program(const Program& p) {
    const ArchConfig& cfg = p.arch;
    const std::int32_t unit_count = cfg.cu_count;
    const std::int32_t bytes = word_bytes(cfg);
    if (p.words.size() !=
        static_cast<std::size_t>(p.total_cycles) * static_cast<std::size_t>(bytes))
        throw Error("program word buffer does not match its cycle count");
    if (p.l_streams.size() != static_cast<std::size_t>(unit_count) ||
        p.b_streams.size() != static_cast<std::size_t>(unit_count) ||
        p.tag_runs.size() != static_cast<std::size_t>(unit_count))
        throw Error("program stream count does not match the unit count");

    std::vector<Bank> xi(unit_count, Bank(cfg.xi_words()));
    std::vector<Bank> psum(unit_count, Bank(cfg.psum_words()));
    std::vector<float> feedback(unit_count, 0.0f);
    std::vector<std::vector<float>> dm(unit_count);
    std::vector<std::size_t> l_cur(unit_count, 0), b_cur(unit_count, 0);
    std::vector<TagCursor> tags(unit_count);
    for (std::int32_t c = 0; c < unit_count; ++c) tags[c].runs = &p.tag_runs[c];

    SimReport rep;
    rep.total_cycles = p.total_cycles;
    rep.executes_per_cu.assign(unit_count, 0);
    rep.nops_per_cu.assign(unit_count, 0);

    std::vector<CuInstruction> sl(unit_count);
    std::vector<float> read_data(unit_count), dm_data(unit_count);
    std::vector<std::uint8_t> has_read(unit_count), active(unit_count);
    std::vector<float> ps_in(unit_count), pe_out(unit_count);
    std::vector<std::uint8_t> done(unit_count);
    std::vector<std::int32_t> consumers(unit_count);
    std::vector<std::int32_t> lane_to(unit_count);  // bank -> driving unit

    for (std::int64_t w = 0; w < p.total_cycles; ++w) {
        const std::int64_t t = w + 1;  // compiler cycles are 1-based
        const std::uint8_t* word = p.words.data() + w * bytes;
        for (std::int32_t c = 0; c < unit_count; ++c) {
            sl[c] = decode_slice(cfg, c, word);
            if (sl[c].pe_ctl > kPeEdge) fail(t, c, "reserved PE control value");
            active[c] = sl[c].pe_ctl != kPeIdle;
        }

        // -- Solution-file readouts drive the bank exports.
        for (std::int32_t c = 0; c < unit_count; ++c) {
            has_read[c] = sl[c].xi_read_en;
            if (sl[c].xi_read_en)
                read_data[c] = xi[c].read(t, c, sl[c].xi_read_addr, "solution-file");
        }

        // -- Grouped-read accounting: k same-cycle consumers of one export
        //    cost a single access, saving k-1.
        std::fill(consumers.begin(), consumers.end(), 0);
        for (std::int32_t c = 0; c < unit_count; ++c) {
            if (!active[c] || sl[c].pe_ctl != kPeEdge) continue;
            if (!sl[c].in_valid) fail(t, c, "accumulate step without an input operand");
            if (sl[c].in_sel >= static_cast<std::uint32_t>(unit_count))
                fail(t, c, "input select names a unit that does not exist");
            ++consumers[sl[c].in_sel];
        }
        for (std::int32_t c = 0; c < unit_count; ++c)
            if (consumers[c] > 1) rep.reuse += consumers[c] - 1;

        // -- Per-unit operands that never depend on another unit: the
        //    partial-sum input (file slot, feedback register, or zero) and
        //    the stream pops.
        for (std::int32_t c = 0; c < unit_count; ++c) {
            if (!active[c]) continue;
            if (sl[c].psum_read_en) {
                ps_in[c] = psum[c].read(t, c, sl[c].psum_read_addr, "partial-sum");
                psum[c].release(sl[c].psum_read_addr);
            } else {
                const std::uint32_t msb = 1u << (cfg.k_log2 - 1);
                ps_in[c] = (sl[c].psum_read_addr & msb) ? feedback[c] : 0.0f;
            }
            if (l_cur[c] >= p.l_streams[c].size())
                fail(t, c, "coefficient stream underflow");
            if (sl[c].pe_ctl == kPeSolve && b_cur[c] >= p.b_streams[c].size())
                fail(t, c, "right-hand-side stream underflow");
        }

        // -- Compute. Solves and accumulates fed by a file readout finish in
        //    one pass; an accumulate fed by another unit's same-cycle result
        //    (export bypass) waits until that result exists.
        for (std::int32_t c = 0; c < unit_count; ++c) done[c] = !active[c];
        std::int32_t pending = 0;
        for (std::int32_t c = 0; c < unit_count; ++c) pending += !done[c];
        while (pending > 0) {
            bool progress = false;
            for (std::int32_t c = 0; c < unit_count; ++c) {
                if (done[c]) continue;
                float operand;
                if (sl[c].pe_ctl == kPeSolve) {
                    operand = p.b_streams[c][b_cur[c]++];
                    pe_out[c] = (operand - ps_in[c]) * p.l_streams[c][l_cur[c]++];
                } else {
                    const std::int32_t src = static_cast<std::int32_t>(sl[c].in_sel);
                    if (has_read[src]) {
                        operand = read_data[src];
                    } else if (done[src] && active[src]) {
                        operand = pe_out[src];
                    } else if (!active[src]) {
                        fail(t, c, "input taken from a unit with no exportable value");
                    } else {
                        continue;  // bypass source not computed yet
                    }
                    pe_out[c] = ps_in[c] + p.l_streams[c][l_cur[c]++] * operand;
                }
                done[c] = 1;
                --pending;
                progress = true;
            }
            if (!progress) {
                for (std::int32_t c = 0; c < unit_count; ++c)
                    if (!done[c]) fail(t, c, "circular same-cycle value forwarding");
            }
        }

        // -- Readout release happens before this cycle's writes so a freed
        //    slot is immediately reusable by the priority encoder.
        for (std::int32_t c = 0; c < unit_count; ++c)
            if (sl[c].xi_read_en && sl[c].xi_release) xi[c].release(sl[c].xi_read_addr);

        // -- Data-memory fetches.
        for (std::int32_t c = 0; c < unit_count; ++c) {
            if (!sl[c].dm_read_en) continue;
            if (sl[c].dm_read_addr >= dm[c].size())
                fail(t, c, "data-memory read past the write counter");
            dm_data[c] = dm[c][sl[c].dm_read_addr];
        }

        // -- Output-crossbar lanes. A lane carries the unit's data-memory
        //    readout when that fetch is not already feeding the unit's own
        //    bank; otherwise it carries the PE result.
        std::fill(lane_to.begin(), lane_to.end(), -1);
        for (std::int32_t o = 0; o < unit_count; ++o) {
            if (!sl[o].out_valid) continue;
            if (sl[o].out_sel >= static_cast<std::uint32_t>(unit_count))
                fail(t, o, "output select names a unit that does not exist");
            const std::int32_t dest = static_cast<std::int32_t>(sl[o].out_sel);
            if (lane_to[dest] >= 0)
                fail(t, o, "crossbar contention: two lanes target one bank");
            lane_to[dest] = o;
        }
        auto lane_value = [&](std::int64_t cyc, std::int32_t o) -> float {
            const bool dm_feeds_own =
                sl[o].dm_read_en && sl[o].xi_write_en && (sl[o].s34 & 1u);
            if (sl[o].dm_read_en && !dm_feeds_own) return dm_data[o];
            if (!active[o]) fail(cyc, o, "output lane driven with no value");
            return pe_out[o];
        };

        // -- Solution-file writes.
        for (std::int32_t b = 0; b < unit_count; ++b) {
            if (!sl[b].xi_write_en) {
                if (lane_to[b] >= 0)
                    fail(t, lane_to[b], "crossbar value dropped: target bank is not writing");
                continue;
            }
            float v;
            if (sl[b].s34 & 1u) {
                if (!sl[b].dm_read_en)
                    fail(t, b, "solution write sourced from an idle data memory");
                v = dm_data[b];
            } else {
                if (lane_to[b] < 0) fail(t, b, "solution write with no crossbar driver");
                v = lane_value(t, lane_to[b]);
            }
            xi[b].write(t, b, v, "solution");
        }

        // -- Partial-sum parking stores the feedback register (the sum that
        //    was live before this cycle's compute).
        for (std::int32_t c = 0; c < unit_count; ++c)
            if (sl[c].psum_write_en) psum[c].write(t, c, feedback[c], "partial-sum");

        // -- Data-memory appends.
        for (std::int32_t c = 0; c < unit_count; ++c) {
            if (!sl[c].dm_write_en) continue;
            float v;
            if ((sl[c].s34 >> 1) & 1u) {
                if (!sl[c].xi_read_en)
                    fail(t, c, "data-memory write sourced from an idle readout");
                v = read_data[c];
            } else {
                if (!active[c]) fail(t, c, "data-memory write with an idle PE");
                v = pe_out[c];
            }
            if (dm[c].size() >= static_cast<std::size_t>(cfg.dm_words()))
                fail(t, c, "data-memory write counter overflow");
            dm[c].push_back(v);
            ++rep.dm_writes;
        }

        for (std::int32_t c = 0; c < unit_count; ++c)
            if (active[c]) feedback[c] = pe_out[c];

        // -- Bookkeeping: execute/idle counts against the sidecar, residency.
        for (std::int32_t c = 0; c < unit_count; ++c) {
            const std::uint8_t kind = tags[c].next(t, c);
            if ((kind == kTagExecute) != (active[c] != 0))
                fail(t, c, "tag sidecar disagrees with the instruction stream");
            if (kind == kTagExecute) {
                ++rep.executes_per_cu[c];
            } else {
                ++rep.nops_per_cu[c];
                ++rep.nop_breakdown[kind];
            }
            rep.max_residency = std::max<std::int64_t>(rep.max_residency, xi[c].live);
        }
    }

    // -- End-of-run conservation: every stream fully drained, every register
    //    slot released, one data-memory word per row.
    for (std::int32_t c = 0; c < unit_count; ++c) {
        if (l_cur[c] != p.l_streams[c].size())
            fail(p.total_cycles, c, "coefficient stream not fully consumed");
        if (b_cur[c] != p.b_streams[c].size())
            fail(p.total_cycles, c, "right-hand-side stream not fully consumed");
        if (xi[c].live != 0)
            fail(p.total_cycles, c, "solution file holds unreleased values at program end");
        if (psum[c].live != 0)
            fail(p.total_cycles, c, "partial-sum file holds unresumed values at program end");
    }
    if (rep.dm_writes != p.n ||
        p.out_perm.size() != static_cast<std::size_t>(p.n))
        throw Error("data-memory contents do not cover every row");

    rep.x.assign(p.n, 0.0f);
    std::size_t g = 0;
    for (std::int32_t c = 0; c < unit_count; ++c)
        for (float v : dm[c]) rep.x[p.out_perm[g++]] = v;

    if (p.total_cycles > 0) {
        const double ops = 2.0 * static_cast<double>(p.nnz) - p.n;
        const double seconds = static_cast<double>(p.total_cycles) / cfg.clock_hz;
        rep.throughput_gops = ops / seconds / 1e9;
    }
    return rep;
}

}  // namespace sptrsv
