#include "sptrsv/backend.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace sptrsv {

namespace {

// One entry per distinct readout event (several units consuming the same row
// in one cycle share one port access) and one per stored completion.
struct AccessLists {
    std::vector<std::pair<std::int64_t, std::int32_t>> readouts;    // (cycle, source row)
    std::vector<std::pair<std::int64_t, std::int32_t>> deliveries;  // (cycle, completed row)
};

AccessLists collect_accesses(const Schedule& s, const SolveDag& dag) {
    AccessLists a;
    for (const CuSchedule& cu : s.cus)
        for (const ExecAction& e : cu.execs) {
            if (e.source >= 0)
                a.readouts.emplace_back(e.cycle, e.source);
            else if (!dag.succs[e.node].empty())
                a.deliveries.emplace_back(e.cycle, e.node);
        }
    std::sort(a.readouts.begin(), a.readouts.end());
    a.readouts.erase(std::unique(a.readouts.begin(), a.readouts.end()), a.readouts.end());
    std::sort(a.deliveries.begin(), a.deliveries.end());
    return a;
}

// Walks one unit's timeline slot by slot, interleaving the execute list with
// the run-length-encoded idle tags exactly as they were recorded.
struct SlotCursor {
    const CuSchedule* cu = nullptr;
    std::size_t exec_i = 0;
    std::size_t run_i = 0;
    std::int64_t run_left = 0;
    std::int64_t next_cycle = 1;  // original cycle of the next unconsumed slot

    explicit SlotCursor(const CuSchedule& c) : cu(&c) {
        if (!c.nops.empty()) run_left = c.nops[0].count;
    }
    bool exec_done() const { return exec_i >= cu->execs.size(); }
    bool next_is_exec() const {
        return !exec_done() && cu->execs[exec_i].cycle == next_cycle;
    }
    bool has_tag() const { return run_i < cu->nops.size() && run_left > 0; }
    NopTag peek_tag() const { return cu->nops[run_i].tag; }
    void consume_tag() {
        ++next_cycle;
        if (--run_left == 0) {
            ++run_i;
            if (run_i < cu->nops.size()) run_left = cu->nops[run_i].count;
        }
    }
    void consume_exec() {
        ++next_cycle;
        ++exec_i;
    }
};

// Rebuilds a unit timeline, run-length-encoding consecutive idle tags.
struct CuBuilder {
    CuSchedule out;
    bool has_pending = false;
    NopTag pend_tag = NopTag::Lnop;
    std::int64_t pend_count = 0;

    void nop(NopTag t) {
        if (has_pending && pend_tag == t) {
            ++pend_count;
            return;
        }
        flush();
        has_pending = true;
        pend_tag = t;
        pend_count = 1;
    }
    void exec(const ExecAction& e) {
        flush();
        out.execs.push_back(e);
    }
    void flush() {
        if (has_pending) out.nops.push_back({pend_tag, pend_count});
        has_pending = false;
        pend_count = 0;
    }
};

std::int64_t port_key(std::int64_t cycle, std::int32_t unit_count, std::int32_t unit) {
    return cycle * unit_count + unit;
}

}  // namespace

ConstraintGraph build_constraints(const Schedule& s, const SolveDag& dag) {
    ConstraintGraph g;
    g.node_count = s.node_count;
    AccessLists acc = collect_accesses(s, dag);
    const std::int64_t n = s.node_count;

    auto pair_up = [n](const std::vector<std::pair<std::int64_t, std::int32_t>>& events,
                       std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
        std::unordered_set<std::int64_t> seen;
        std::size_t i = 0;
        while (i < events.size()) {
            std::size_t j = i;
            while (j < events.size() && events[j].first == events[i].first) ++j;
            for (std::size_t a = i; a < j; ++a)
                for (std::size_t b = a + 1; b < j; ++b) {
                    std::int32_t u = events[a].second;
                    std::int32_t v = events[b].second;
                    if (u > v) std::swap(u, v);
                    if (seen.insert(static_cast<std::int64_t>(u) * n + v).second)
                        edges.emplace_back(u, v);
                }
            i = j;
        }
    };
    pair_up(acc.readouts, g.read_edges);
    pair_up(acc.deliveries, g.write_edges);
    return g;
}

BankPlan color_banks(const ConstraintGraph& g, const Schedule& s, const SolveDag& dag,
                     std::int32_t cu_count) {
    const std::int32_t n = g.node_count;
    BankPlan plan;
    plan.bank.assign(n, -1);
    if (cu_count <= 0) throw Error("bank coloring requires a positive unit count");

    std::vector<std::vector<std::int32_t>> adj(n);
    auto add = [&](const std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
        for (auto [u, v] : edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
    };
    add(g.read_edges);
    add(g.write_edges);
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    std::vector<std::int32_t> order(n);
    for (std::int32_t v = 0; v < n; ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        if (adj[a].size() != adj[b].size()) return adj[a].size() > adj[b].size();
        return a < b;
    });

    std::vector<std::int64_t> mark(cu_count, -1);
    std::vector<std::int64_t> use_count(cu_count, 0);
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
        const std::int32_t v = order[idx];
        const std::int64_t stamp = static_cast<std::int64_t>(idx);
        for (std::int32_t w : adj[v])
            if (plan.bank[w] >= 0) mark[plan.bank[w]] = stamp;
        std::int32_t color = -1;
        for (std::int32_t c = 0; c < cu_count; ++c)
            if (mark[c] != stamp) {
                color = c;
                break;
            }
        if (color < 0) {
            // Every bank is taken by a neighbor: keep the one this value
            // collides with least often and record the unavoidable clashes.
            ++plan.overflow_nodes;
            std::vector<std::int64_t> among(cu_count, 0);
            for (std::int32_t w : adj[v])
                if (plan.bank[w] >= 0) ++among[plan.bank[w]];
            color = 0;
            for (std::int32_t c = 1; c < cu_count; ++c)
                if (among[c] < among[color]) color = c;
        }
        plan.bank[v] = color;
        ++use_count[color];
    }

    // Count the co-access events the coloring could not separate: for k rows
    // sharing one bank port in one cycle, k-1 accesses must wait.
    AccessLists acc = collect_accesses(s, dag);
    auto residual = [&](const std::vector<std::pair<std::int64_t, std::int32_t>>& events) {
        std::int64_t clashes = 0;
        std::unordered_map<std::int32_t, std::int64_t> per_bank;
        std::size_t i = 0;
        while (i < events.size()) {
            std::size_t j = i;
            per_bank.clear();
            while (j < events.size() && events[j].first == events[i].first) {
                ++per_bank[plan.bank[events[j].second]];
                ++j;
            }
            for (auto& [b, k] : per_bank) clashes += k - 1;
            i = j;
        }
        return clashes;
    };
    plan.residual_read_conflicts = residual(acc.readouts);
    plan.residual_write_conflicts = residual(acc.deliveries);
    return plan;
}

Schedule resolve_conflicts(const Schedule& s, const SolveDag& dag, const BankPlan& banks) {
    if (banks.residual_read_conflicts == 0 && banks.residual_write_conflicts == 0) return s;
    const std::int32_t unit_count = static_cast<std::int32_t>(s.cus.size());

    std::vector<std::int64_t> completion_new(s.node_count, -1);
    for (std::int32_t v = 0; v < s.node_count; ++v)
        if (s.completion[v] == 0) completion_new[v] = 0;  // solved before cycle 1

    std::vector<SlotCursor> cur;
    std::vector<CuBuilder> bld(unit_count);
    cur.reserve(unit_count);
    std::int64_t remaining = 0;
    for (const CuSchedule& cu : s.cus) {
        cur.emplace_back(cu);
        remaining += static_cast<std::int64_t>(cu.execs.size());
    }

    // Port claims for the cycle being assembled. A bank readout is shared
    // when every consumer wants the same row; a second row must wait.
    std::unordered_map<std::int32_t, std::int32_t> read_claim;  // bank -> row being read
    std::unordered_set<std::int32_t> write_claim;               // banks written this cycle

    const std::int64_t bound = s.total_cycles + remaining + 16;
    std::int64_t t = 0;
    while (remaining > 0) {
        ++t;
        if (t > bound)
            throw Error("conflict resolution failed to converge (scheduler invariant broken)");
        read_claim.clear();
        write_claim.clear();
        for (std::int32_t c = 0; c < unit_count; ++c) {
            SlotCursor& sc = cur[c];
            if (sc.exec_done()) {
                // Nothing left to execute: replay the recorded trailing tags.
                if (sc.has_tag()) {
                    bld[c].nop(sc.peek_tag());
                    sc.consume_tag();
                } else {
                    bld[c].nop(NopTag::Lnop);
                }
                continue;
            }
            if (!sc.next_is_exec()) {
                bld[c].nop(sc.peek_tag());
                sc.consume_tag();
                continue;
            }
            const ExecAction& e = sc.cu->execs[sc.exec_i];
            bool ok = true;
            if (e.source >= 0) {
                ok = completion_new[e.source] >= 0 && completion_new[e.source] < t;
                if (ok) {
                    const std::int32_t b = banks.bank[e.source];
                    auto it = read_claim.find(b);
                    if (it == read_claim.end())
                        read_claim.emplace(b, e.source);
                    else if (it->second != e.source)
                        ok = false;
                }
            } else if (!dag.succs[e.node].empty()) {
                const std::int32_t b = banks.bank[e.node];
                ok = write_claim.insert(b).second;
            }
            if (ok) {
                ExecAction moved = e;
                moved.cycle = t;
                bld[c].exec(moved);
                if (e.source < 0) completion_new[e.node] = t;
                sc.consume_exec();
                --remaining;
            } else {
                bld[c].nop(NopTag::Bnop);
            }
        }
    }

    Schedule out;
    out.node_count = s.node_count;
    out.total_cycles = t;
    out.dataflow = s.dataflow;
    out.icr = s.icr;
    out.psum_capacity = s.psum_capacity;
    out.assignment = s.assignment;
    out.completion = std::move(completion_new);
    out.cus.resize(unit_count);
    for (std::int32_t c = 0; c < unit_count; ++c) {
        bld[c].flush();
        out.cus[c] = std::move(bld[c].out);
        out.cus[c].tasks = s.cus[c].tasks;
    }
    return out;
}

RegisterPlan allocate_registers(const Schedule& s, const SolveDag& dag, const BankPlan& banks,
                                const ArchConfig& cfg) {
    const std::int32_t unit_count = static_cast<std::int32_t>(s.cus.size());
    const std::int32_t n = s.node_count;
    const std::int64_t cap = cfg.xi_words();
    // Keep two slots free after every write so a delivery and a refetch can
    // always land; a two-entry file can only protect one.
    const std::int64_t headroom = std::min<std::int64_t>(2, cap - 1);
    const std::int64_t T = s.total_cycles;

    AccessLists acc = collect_accesses(s, dag);
    std::vector<std::vector<std::int64_t>> reads(n);
    for (auto [cycle, u] : acc.readouts) reads[u].push_back(cycle);

    struct NodeState {
        std::size_t next_read = 0;
        std::int64_t last_read = -1;
        bool resident = false;
        bool by_reload = false;
        bool no_evict = false;
        std::int64_t reads_since_write = 0;
        std::int64_t active_reload = -1;  // index into placed list while unread
    };
    std::vector<NodeState> ns(n);
    std::vector<std::vector<std::int32_t>> resident(unit_count);  // per bank, unsorted

    // Port claims over the resolved timeline (deliveries claim their bank's
    // write port and their unit's output lane up front).
    std::unordered_set<std::int64_t> xi_write_busy;
    std::unordered_set<std::int64_t> out_lane_busy;
    std::unordered_set<std::int64_t> dm_read_busy;
    for (auto [cycle, v] : acc.deliveries) {
        xi_write_busy.insert(port_key(cycle, unit_count, banks.bank[v]));
        out_lane_busy.insert(port_key(cycle, unit_count, s.assignment[v]));
    }

    struct PlacedReload {
        std::int64_t cycle;  // resolved coordinates
        std::int32_t node;
        bool canceled = false;
    };
    std::vector<PlacedReload> placed;
    // Values are indices into `placed`; keys are resolved cycles.
    std::map<std::int64_t, std::vector<std::size_t>> pending_reload_writes;
    std::map<std::int64_t, std::vector<std::size_t>> insert_before;
    std::vector<std::pair<std::int64_t, std::int32_t>> releasing_raw;  // (resolved cycle, bank)

    RegisterPlan plan;
    plan.delivered.assign(n, 0);
    for (std::int32_t v = 0; v < n; ++v)
        if (!dag.succs[v].empty()) plan.delivered[v] = 1;

    auto next_use = [&](std::int32_t w) { return reads[w][ns[w].next_read]; };

    // Evict one value from bank b (context cycle t) and schedule its refetch.
    auto spill_one = [&](std::int32_t b, std::int64_t t) -> bool {
        std::int32_t victim = -1;
        for (std::int32_t w : resident[b]) {
            if (ns[w].no_evict) continue;
            if (victim < 0 || next_use(w) > next_use(victim) ||
                (next_use(w) == next_use(victim) && w < victim))
                victim = w;
        }
        if (victim < 0) return false;
        ++plan.spill_count;
        auto& rb = resident[b];
        rb.erase(std::find(rb.begin(), rb.end(), victim));
        NodeState& st = ns[victim];
        if (st.reads_since_write == 0) {
            // Never consumed since it landed: undo the write instead of
            // freeing late. A canceled completion stays in data memory only.
            if (st.by_reload)
                placed[st.active_reload].canceled = true;
            else
                plan.delivered[victim] = 0;
        } else {
            releasing_raw.emplace_back(st.last_read, b);
        }
        st.resident = false;
        st.active_reload = -1;

        const std::int64_t r = next_use(victim);
        const std::int32_t owner = s.assignment[victim];
        std::int64_t at = -1;
        for (std::int64_t q = r - 1; q > t; --q) {
            if (xi_write_busy.count(port_key(q, unit_count, b))) continue;
            if (dm_read_busy.count(port_key(q, unit_count, owner))) continue;
            if (owner != b && out_lane_busy.count(port_key(q, unit_count, owner))) continue;
            at = q;
            break;
        }
        if (at >= 0) {
            xi_write_busy.insert(port_key(at, unit_count, b));
            dm_read_busy.insert(port_key(at, unit_count, owner));
            if (owner != b) out_lane_busy.insert(port_key(at, unit_count, owner));
            placed.push_back({at, victim, false});
            pending_reload_writes[at].push_back(placed.size() - 1);
        } else {
            // No cycle in range has all three ports free: stretch the
            // timeline with a fresh column right before the consumer.
            placed.push_back({0, victim, false});  // cycle fixed at renumbering
            insert_before[r].push_back(placed.size() - 1);
        }
        return true;
    };

    auto land = [&](std::int32_t w, bool by_reload, bool protect, std::int64_t t) {
        const std::int32_t b = banks.bank[w];
        NodeState& st = ns[w];
        st.resident = true;
        st.by_reload = by_reload;
        st.no_evict = protect;
        st.reads_since_write = 0;
        resident[b].push_back(w);
        plan.max_residency =
            std::max(plan.max_residency, static_cast<std::int64_t>(resident[b].size()));
        while (cap - static_cast<std::int64_t>(resident[b].size()) < headroom)
            if (!spill_one(b, t)) {
                if (static_cast<std::int64_t>(resident[b].size()) > cap)
                    throw Error("register bank demand exceeds 2^M live values; "
                                "increase the bank size");
                break;
            }
    };

    std::size_t ri = 0, di = 0;
    for (std::int64_t t = 1; t <= T; ++t) {
        // Refetches assigned to inserted columns commit between t-1 and t.
        // A landing can evict another value whose refetch also has no free
        // ports, appending to the very list being walked (indexed loop).
        if (auto it = insert_before.find(t); it != insert_before.end()) {
            for (std::size_t k = 0; k < it->second.size(); ++k) {
                const std::size_t pi = it->second[k];
                const std::int32_t w = placed[pi].node;
                ns[w].active_reload = static_cast<std::int64_t>(pi);
                land(w, true, true, t - 1);
            }
        }
        for (; ri < acc.readouts.size() && acc.readouts[ri].first == t; ++ri) {
            const std::int32_t u = acc.readouts[ri].second;
            NodeState& st = ns[u];
            if (!st.resident)
                throw Error("register planning lost a live value (internal error)");
            ++st.reads_since_write;
            st.last_read = t;
            st.no_evict = false;
            st.active_reload = -1;
            ++st.next_read;
            if (st.next_read == reads[u].size()) {
                const std::int32_t b = banks.bank[u];
                releasing_raw.emplace_back(t, b);
                auto& rb = resident[b];
                rb.erase(std::find(rb.begin(), rb.end(), u));
                st.resident = false;
            }
        }
        if (auto it = pending_reload_writes.find(t); it != pending_reload_writes.end())
            for (std::size_t k = 0; k < it->second.size(); ++k) {
                const std::size_t pi = it->second[k];
                ns[placed[pi].node].active_reload = static_cast<std::int64_t>(pi);
                land(placed[pi].node, true, false, t);
            }
        for (; di < acc.deliveries.size() && acc.deliveries[di].first == t; ++di) {
            const std::int32_t v = acc.deliveries[di].second;
            land(v, false, false, t);
        }
    }

    // Renumber: each column inserted before resolved cycle q shifts q and
    // everything after it one cycle later.
    std::vector<std::int64_t> offs(T + 2, 0);
    for (auto& [q, rows] : insert_before) offs[q] += static_cast<std::int64_t>(rows.size());
    for (std::int64_t t = 1; t <= T + 1; ++t) offs[t] += offs[t - 1];
    auto final_cycle = [&](std::int64_t t) { return t + offs[t]; };

    plan.sched.node_count = s.node_count;
    plan.sched.total_cycles = T + offs[T];
    plan.sched.dataflow = s.dataflow;
    plan.sched.icr = s.icr;
    plan.sched.psum_capacity = s.psum_capacity;
    plan.sched.assignment = s.assignment;
    plan.sched.completion.assign(n, 0);
    for (std::int32_t v = 0; v < n; ++v)
        if (s.completion[v] > 0) plan.sched.completion[v] = final_cycle(s.completion[v]);
    plan.sched.cus.resize(unit_count);
    for (std::int32_t c = 0; c < unit_count; ++c) {
        SlotCursor sc(s.cus[c]);
        CuBuilder cb;
        for (std::int64_t t = 1; t <= T; ++t) {
            if (auto it = insert_before.find(t); it != insert_before.end())
                for (std::size_t k = 0; k < it->second.size(); ++k) cb.nop(NopTag::Bnop);
            if (sc.next_is_exec()) {
                ExecAction e = sc.cu->execs[sc.exec_i];
                e.cycle = final_cycle(t);
                cb.exec(e);
                sc.consume_exec();
            } else {
                cb.nop(sc.has_tag() ? sc.peek_tag() : NopTag::Lnop);
                if (sc.has_tag()) sc.consume_tag();
            }
        }
        cb.flush();
        plan.sched.cus[c] = std::move(cb.out);
        plan.sched.cus[c].tasks = s.cus[c].tasks;
    }

    for (const PlacedReload& pr : placed)
        if (!pr.canceled && pr.cycle > 0) plan.reloads.push_back({final_cycle(pr.cycle), pr.node});
    for (auto& [q, indices] : insert_before) {
        const std::int64_t base = q + offs[q - 1];
        for (std::size_t k = 0; k < indices.size(); ++k)
            // A canceled refetch leaves its inserted column idle.
            if (!placed[indices[k]].canceled)
                plan.reloads.push_back(
                    {base + static_cast<std::int64_t>(k), placed[indices[k]].node});
    }
    std::sort(plan.reloads.begin(), plan.reloads.end(),
              [](const Reload& a, const Reload& b) { return a.cycle < b.cycle; });
    for (auto [t, b] : releasing_raw)
        plan.releasing.insert(port_key(final_cycle(t), unit_count, b));
    return plan;
}

Program emit_program(const SolveDag& dag, const CsrMatrix& m, const Rhs& b,
                     const BankPlan& banks, const RegisterPlan& regs, const ArchConfig& cfg,
                     const std::string& matrix_name) {
    cfg.validate();
    const Schedule& s = regs.sched;
    const std::int32_t unit_count = static_cast<std::int32_t>(s.cus.size());
    if (unit_count != cfg.cu_count)
        throw Error("schedule unit count does not match the configuration");
    const std::int32_t n = s.node_count;
    if (static_cast<std::int32_t>(b.b.size()) != n)
        throw Error("right-hand side length does not match the matrix dimension");
    for (std::int32_t v = 0; v < n; ++v)
        if (s.assignment[v] < 0)
            throw Error("schedules with pre-solved rows cannot be lowered");

    const std::int64_t T = s.total_cycles;
    const std::size_t wb = word_bytes(cfg);

    Program p;
    p.arch = cfg;
    p.total_cycles = T;
    p.n = n;
    p.nnz = m.nnz;
    p.matrix_name = matrix_name;
    p.words.assign(static_cast<std::size_t>(T) * wb, 0);
    p.l_streams.resize(unit_count);
    p.b_streams.resize(unit_count);
    p.tag_runs.resize(unit_count);

    // Row solve order per unit fixes both the data-memory layout and the
    // output permutation.
    std::vector<std::int32_t> dm_index(n, -1);
    {
        std::vector<std::int64_t> counter(unit_count, 0);
        for (std::int32_t c = 0; c < unit_count; ++c)
            for (const ExecAction& e : s.cus[c].execs)
                if (e.source < 0) dm_index[e.node] = static_cast<std::int32_t>(counter[c]++);
        const std::int64_t dm_cap = cfg.dm_words();
        for (std::int32_t c = 0; c < unit_count; ++c) {
            if (counter[c] > dm_cap)
                throw Error("data memory address space too small for " +
                            std::to_string(counter[c]) + " rows on one unit; increase T");
            for (const ExecAction& e : s.cus[c].execs)
                if (e.source < 0) p.out_perm.push_back(e.node);
        }
    }

    auto edge_value = [&](std::int32_t dst, std::int32_t src) {
        const auto& pr = dag.preds[dst];
        auto it = std::lower_bound(pr.begin(), pr.end(), src,
                                   [](const DagEdge& e, std::int32_t x) { return e.src < x; });
        if (it == pr.end() || it->src != src)
            throw Error("schedule references a matrix entry that does not exist");
        return it->val;
    };

    // Replay state: solution-file slots per bank, partial-sum slots per unit.
    const std::int64_t xi_cap = cfg.xi_words();
    const std::int64_t ps_cap = cfg.psum_words();
    std::vector<std::vector<std::int32_t>> xi_slot(unit_count,
                                                   std::vector<std::int32_t>(xi_cap, -1));
    std::vector<std::unordered_map<std::int32_t, std::int32_t>> xi_where(unit_count);
    std::vector<std::vector<std::int32_t>> ps_slot(unit_count,
                                                   std::vector<std::int32_t>(ps_cap, -1));
    auto lowest_free = [](std::vector<std::int32_t>& slots) {
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i] < 0) return static_cast<std::int32_t>(i);
        return -1;
    };

    std::vector<SlotCursor> slot;
    slot.reserve(unit_count);
    for (const CuSchedule& cu : s.cus) slot.emplace_back(cu);
    struct TagRle {
        std::vector<TagRun> out;
        void add(std::uint8_t kind) {
            if (!out.empty() && out.back().kind == kind)
                ++out.back().count;
            else
                out.push_back({kind, 1});
        }
    };
    std::vector<TagRle> runs(unit_count);
    std::size_t reload_i = 0;

    std::vector<CuInstruction> slices(unit_count);
    struct XiWrite {
        std::int32_t bank;
        std::int32_t node;
        bool from_own_dm;
    };
    std::vector<XiWrite> xi_writes;
    std::vector<std::pair<std::int32_t, std::int32_t>> ps_writes;  // (unit, row)
    std::unordered_map<std::int32_t, std::int32_t> read_of_bank;   // bank -> row

    for (std::int64_t t = 1; t <= T; ++t) {
        std::fill(slices.begin(), slices.end(), CuInstruction{});
        xi_writes.clear();
        ps_writes.clear();
        read_of_bank.clear();

        // Readout fields first: all consumers of a row share one access.
        for (std::int32_t c = 0; c < unit_count; ++c) {
            if (!slot[c].next_is_exec()) continue;
            const ExecAction& e = s.cus[c].execs[slot[c].exec_i];
            if (e.source < 0) continue;
            auto [it, fresh] = read_of_bank.emplace(banks.bank[e.source], e.source);
            if (!fresh && it->second != e.source)
                throw Error("two rows mapped to one bank are read in the same cycle; "
                            "resolve conflicts before emitting");
        }
        for (auto [bank, u] : read_of_bank) {
            auto it = xi_where[bank].find(u);
            if (it == xi_where[bank].end())
                throw Error("solution value read before it is resident (internal error)");
            CuInstruction& sl = slices[bank];
            sl.xi_read_en = true;
            sl.xi_read_addr = it->second;
            if (regs.releasing.count(port_key(t, unit_count, bank))) {
                sl.xi_release = true;
                xi_slot[bank][it->second] = -1;
                xi_where[bank].erase(it);
            }
        }

        // Execute slices.
        for (std::int32_t c = 0; c < unit_count; ++c) {
            if (!slot[c].next_is_exec()) {
                const NopTag tg = slot[c].has_tag() ? slot[c].peek_tag() : NopTag::Lnop;
                runs[c].add(static_cast<std::uint8_t>(tg));
                if (slot[c].has_tag()) slot[c].consume_tag();
                continue;
            }
            const ExecAction& e = s.cus[c].execs[slot[c].exec_i];
            slot[c].consume_exec();
            runs[c].add(kTagExecute);
            CuInstruction& sl = slices[c];
            switch (e.psum_src) {
                case PsumSource::File: {
                    std::int32_t slot = -1;
                    for (std::size_t i = 0; i < ps_slot[c].size(); ++i)
                        if (ps_slot[c][i] == e.node) slot = static_cast<std::int32_t>(i);
                    if (slot < 0)
                        throw Error("partial sum resumed but never parked (internal error)");
                    sl.psum_read_en = true;
                    sl.psum_read_addr = slot;
                    ps_slot[c][slot] = -1;
                    break;
                }
                case PsumSource::Feedback:
                    sl.psum_read_addr = 1u << (cfg.k_log2 - 1);
                    break;
                case PsumSource::Zero:
                    sl.psum_read_addr = 0;
                    break;
            }
            if (e.write_node >= 0) {
                sl.psum_write_en = true;
                ps_writes.emplace_back(c, e.write_node);
            }
            if (e.source >= 0) {
                sl.pe_ctl = kPeEdge;
                sl.in_valid = true;
                sl.in_sel = banks.bank[e.source];
                p.l_streams[c].push_back(edge_value(e.node, e.source));
            } else {
                sl.pe_ctl = kPeSolve;
                sl.dm_write_en = true;
                p.l_streams[c].push_back(1.0f / dag.diag[e.node]);
                p.b_streams[c].push_back(b.b[e.node]);
                if (regs.delivered[e.node]) {
                    sl.out_valid = true;
                    sl.out_sel = banks.bank[e.node];
                    xi_writes.push_back({banks.bank[e.node], e.node, false});
                }
            }
        }

        // Refetches ride the idle fields of the owner and destination slices.
        for (; reload_i < regs.reloads.size() && regs.reloads[reload_i].cycle == t; ++reload_i) {
            const std::int32_t w = regs.reloads[reload_i].node;
            const std::int32_t owner = s.assignment[w];
            const std::int32_t bank = banks.bank[w];
            CuInstruction& src = slices[owner];
            if (src.dm_read_en)
                throw Error("two data-memory fetches on one unit in a cycle (internal error)");
            src.dm_read_en = true;
            src.dm_read_addr = dm_index[w];
            if (owner != bank) {
                if (src.out_valid)
                    throw Error("output lane already driven in a refetch cycle (internal error)");
                src.out_valid = true;
                src.out_sel = bank;
            }
            xi_writes.push_back({bank, w, owner == bank});
        }

        // Writes land after this cycle's reads released their slots.
        for (const XiWrite& w : xi_writes) {
            CuInstruction& sl = slices[w.bank];
            if (sl.xi_write_en)
                throw Error("two writes into one bank in a cycle (internal error)");
            const std::int32_t slot = lowest_free(xi_slot[w.bank]);
            if (slot < 0)
                throw Error("solution file overflowed its 2^M slots; increase M");
            sl.xi_write_en = true;
            if (w.from_own_dm) sl.s34 |= 1;
            xi_slot[w.bank][slot] = w.node;
            xi_where[w.bank][w.node] = slot;
        }
        for (auto [c, row] : ps_writes) {
            const std::int32_t slot = lowest_free(ps_slot[c]);
            if (slot < 0)
                throw Error("partial-sum file overflowed its capacity; increase K");
            ps_slot[c][slot] = row;
        }

        std::uint8_t* word = p.words.data() + static_cast<std::size_t>(t - 1) * wb;
        for (std::int32_t c = 0; c < unit_count; ++c) encode_slice(slices[c], cfg, c, word);
    }

    for (std::int32_t c = 0; c < unit_count; ++c) p.tag_runs[c] = std::move(runs[c].out);
    return p;
}

}  // namespace sptrsv
