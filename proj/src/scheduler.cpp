#include "sptrsv/scheduler.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sptrsv {

namespace {

/// Per-CU timeline builder: executes plus run-length-encoded nop tags,
/// emitted strictly in cycle order.
struct CuEmitter {
    CuSchedule cu;
    NopTag run_tag = NopTag::Lnop;
    std::int64_t run_len = 0;

    void nop(NopTag t) {
        if (run_len > 0 && run_tag == t) {
            ++run_len;
            return;
        }
        flush();
        run_tag = t;
        run_len = 1;
    }
    void exec(const ExecAction& a) {
        flush();
        cu.execs.push_back(a);
    }
    void flush() {
        if (run_len > 0) {
            cu.nops.push_back({run_tag, run_len});
            run_len = 0;
        }
    }
};

std::vector<std::uint8_t> presolved_mask_of(const SolveDag& dag,
                                            const std::vector<std::int32_t>& presolved) {
    std::vector<std::uint8_t> mask(dag.node_count, 0);
    for (std::int32_t v : presolved) {
        if (v < 0 || v >= dag.node_count) throw Error("presolved node out of range");
        mask[v] = 1;
    }
    return mask;
}

Schedule schedule_coarse(const SolveDag& dag, std::int32_t cu_count,
                         const std::vector<std::uint8_t>& presolved) {
    Schedule s;
    s.node_count = dag.node_count;
    s.dataflow = Dataflow::Coarse;
    s.icr = false;
    s.psum_capacity = 0;
    s.assignment = allocate_nodes(dag, cu_count, presolved);
    s.completion.assign(dag.node_count, -1);

    std::vector<std::vector<std::int32_t>> tasks(cu_count);
    for (std::int32_t v = 0; v < dag.node_count; ++v)
        if (s.assignment[v] >= 0) tasks[s.assignment[v]].push_back(v);

    // A row may start only when every predecessor row is solved; solving at
    // cycle t makes x available from t+1.
    std::vector<std::int32_t> remaining(dag.node_count, 0);
    std::vector<std::int64_t> ready_at(dag.node_count, 1);
    std::int64_t undone = 0;
    for (std::int32_t v = 0; v < dag.node_count; ++v) {
        if (presolved[v]) {
            s.completion[v] = 0;
            continue;
        }
        ++undone;
        for (const DagEdge& e : dag.preds[v])
            if (!presolved[e.src]) ++remaining[v];
    }

    std::vector<CuEmitter> em(cu_count);
    std::vector<std::size_t> ti(cu_count, 0);
    std::vector<std::int32_t> edge_i(cu_count, 0);
    std::vector<std::uint8_t> started(cu_count, 0);

    std::int64_t t = 0;
    while (undone > 0) {
        ++t;
        std::int32_t executed = 0;
        for (std::int32_t c = 0; c < cu_count; ++c) {
            if (ti[c] == tasks[c].size()) {
                em[c].nop(NopTag::Lnop);
                continue;
            }
            const std::int32_t v = tasks[c][ti[c]];
            if (!started[c]) {
                if (remaining[v] == 0 && ready_at[v] <= t) {
                    started[c] = 1;
                    edge_i[c] = 0;
                } else {
                    em[c].nop(NopTag::Dnop);
                    continue;
                }
            }
            const auto& pr = dag.preds[v];
            ExecAction a;
            a.cycle = t;
            a.node = v;
            if (edge_i[c] < static_cast<std::int32_t>(pr.size())) {
                a.source = pr[edge_i[c]].src;
                a.psum_src = edge_i[c] == 0 ? PsumSource::Zero : PsumSource::Feedback;
                ++edge_i[c];
            } else {
                a.source = -1;
                a.psum_src = pr.empty() ? PsumSource::Zero : PsumSource::Feedback;
                s.completion[v] = t;
                --undone;
                for (std::int32_t w : dag.succs[v]) {
                    --remaining[w];
                    ready_at[w] = std::max(ready_at[w], t + 1);
                }
                ++ti[c];
                started[c] = 0;
            }
            em[c].exec(a);
            ++executed;
        }
        if (executed == 0)
            throw Error("coarse scheduler stalled with unsolved rows at cycle " +
                        std::to_string(t));
    }

    s.total_cycles = t;
    s.cus.resize(cu_count);
    for (std::int32_t c = 0; c < cu_count; ++c) {
        em[c].flush();
        s.cus[c] = std::move(em[c].cu);
        s.cus[c].tasks = std::move(tasks[c]);
    }
    return s;
}

/// Availability tracking for one row: in-edges arrive when their source row
/// solves (usable from the following cycle) and stay in `avail` until
/// computed.
struct NodeState {
    std::vector<std::pair<std::int64_t, std::int32_t>> arrivals;  // (ready cycle, src)
    std::size_t head = 0;
    std::set<std::int32_t> avail;
    std::int32_t computed = 0;

    void migrate(std::int64_t now) {
        while (head < arrivals.size() && arrivals[head].first <= now)
            avail.insert(arrivals[head++].second);
    }
};

struct CuState {
    std::vector<std::int32_t> tasks;
    std::set<std::int32_t> unstarted;  // task positions never begun
    std::set<std::int32_t> ready;      // unstarted positions with an available edge
    std::vector<std::pair<std::int64_t, std::int32_t>> ready_queue;  // (cycle, pos)
    std::size_t rq_head = 0;
    std::set<std::int32_t> cached;  // rows parked in the partial-sum file
    std::int32_t current = -1;      // row held in the feedback register
    bool current_solved = true;
    std::int32_t remaining_owned = 0;
    CuEmitter em;

    void pop_ready(std::int64_t now) {
        while (rq_head < ready_queue.size() && ready_queue[rq_head].first <= now) {
            const std::int32_t pos = ready_queue[rq_head++].second;
            if (unstarted.count(pos)) ready.insert(pos);
        }
    }
};

struct Decision {
    enum Kind { None, Edge, Bupd } kind = None;
    std::int32_t node = -1;
    PsumSource psum = PsumSource::Zero;
    std::int32_t write_node = -1;
    NopTag tag = NopTag::Dnop;
    std::int32_t start_pos = -1;  // task position if this begins a new row
    bool from_file = false;       // row resumed from the partial-sum file
};

Schedule schedule_medium(const SolveDag& dag, std::int32_t cu_count, std::int32_t capacity,
                         bool use_icr, const std::vector<std::uint8_t>& presolved) {
    Schedule s;
    s.node_count = dag.node_count;
    s.dataflow = Dataflow::Medium;
    s.icr = use_icr;
    s.psum_capacity = capacity;
    s.assignment = allocate_nodes(dag, cu_count, presolved);
    s.completion.assign(dag.node_count, -1);

    std::vector<NodeState> ns(dag.node_count);
    std::vector<std::int32_t> pos_of(dag.node_count, -1);
    std::vector<CuState> cu(cu_count);
    std::int64_t undone = 0;

    for (std::int32_t v = 0; v < dag.node_count; ++v) {
        const std::int32_t c = s.assignment[v];
        if (c < 0) {
            s.completion[v] = 0;
            continue;
        }
        pos_of[v] = static_cast<std::int32_t>(cu[c].tasks.size());
        cu[c].tasks.push_back(v);
        cu[c].unstarted.insert(pos_of[v]);
        ++cu[c].remaining_owned;
        ++undone;
    }
    for (std::int32_t v = 0; v < dag.node_count; ++v) {
        if (s.assignment[v] < 0) continue;
        bool arrival_now = dag.preds[v].empty();  // roots are ready immediately
        for (const DagEdge& e : dag.preds[v]) {
            if (presolved[e.src]) {
                ns[v].arrivals.emplace_back(1, e.src);
                arrival_now = true;
            }
        }
        if (arrival_now) cu[s.assignment[v]].ready_queue.emplace_back(1, pos_of[v]);
    }

    std::vector<Decision> dec(cu_count);
    std::vector<std::vector<std::int32_t>> icr_in(cu_count);
    const bool gather_icr = use_icr && cu_count > 1;

    std::int64_t t = 0;
    while (undone > 0) {
        ++t;

        for (std::int32_t c = 0; c < cu_count; ++c) {
            CuState& st = cu[c];
            Decision d;

            const std::int32_t free = capacity - static_cast<std::int32_t>(st.cached.size());
            const bool cur_unsolved = st.current >= 0 && !st.current_solved;

            bool cur_edge = false, cur_done = false;
            if (cur_unsolved) {
                NodeState& cs = ns[st.current];
                cs.migrate(t);
                cur_edge = !cs.avail.empty();
                cur_done = !cur_edge && cs.computed == dag.indegree[st.current];
            }
            std::int32_t resume_edge = -1, resume_done = -1;
            for (std::int32_t v : st.cached) {
                ns[v].migrate(t);
                if (!ns[v].avail.empty()) {
                    if (resume_edge < 0) resume_edge = v;
                } else if (ns[v].computed == dag.indegree[v]) {
                    if (resume_done < 0) resume_done = v;
                }
                if (resume_edge >= 0 && resume_done >= 0) break;  // set iterates ascending
            }

            // Start candidate: the lowest-id not-yet-begun row with an
            // operand waiting, subject to the file gates. Beginning a row
            // while the current one is unsolved parks the current row, which
            // costs a file slot: with two or more slots free any ready row
            // may begin, while the last slot is reserved for the oldest
            // not-yet-begun row. Every row below that one is already under
            // way, so the lowest unsolved row in the system can never become
            // a new row with no slot left to begin in — that reservation is
            // what makes a stranded full file unreachable. Over a solved row
            // no park is needed, but with the file full only the oldest
            // not-yet-begun row — or one whose inputs are all solved, which
            // runs straight to completion — may begin; anything else could
            // block later with no slot to be set aside into. Without a file
            // (capacity 0) rows must begin strictly in task order, since a
            // row in progress can never be set aside.
            st.pop_ready(t);
            std::int32_t start_pos = -1;
            bool start_denied = false;
            if (!st.ready.empty()) {
                if (capacity == 0) {
                    const std::int32_t fn = *st.unstarted.begin();
                    if (!cur_unsolved && st.ready.count(fn) > 0)
                        start_pos = fn;
                    else
                        start_denied = true;
                } else {
                    const std::int32_t pos = *st.ready.begin();
                    const std::int32_t first_new = *st.unstarted.begin();
                    if (cur_unsolved) {
                        if (free >= 2 || (free >= 1 && pos == first_new))
                            start_pos = pos;
                        else
                            start_denied = true;
                    } else if (free == 0 && pos != first_new) {
                        const std::int32_t v = st.tasks[pos];
                        ns[v].migrate(t);
                        if (ns[v].avail.size() ==
                            static_cast<std::size_t>(dag.indegree[v]))
                            start_pos = pos;
                        else
                            start_denied = true;
                    } else {
                        start_pos = pos;
                    }
                }
            }

            // Rule 1: finishing wins. A row whose inputs are all consumed
            // solves in one cycle, releases its file slot, and unblocks its
            // dependents, so the lowest such row — held in the feedback
            // register or parked in the partial-sum file — goes first.
            // Otherwise the lowest row id with an operand available wins,
            // whether that row is the current one, parked in the file, or
            // not yet begun: lower rows sit upstream of everything still to
            // come, so serving them first shortens the chains that gate the
            // rest of the solve. A resume releases its file slot within the
            // cycle, so even with the file full an unsolved current row can
            // be parked into the slot the read just freed; the swap never
            // changes the parked count.
            if (cur_done && (resume_done < 0 || st.current < resume_done)) {
                d.kind = Decision::Bupd;
                d.node = st.current;
                d.psum = ns[st.current].computed > 0 ? PsumSource::Feedback : PsumSource::Zero;
            } else if (resume_done >= 0) {
                d.kind = Decision::Bupd;
                d.node = resume_done;
                d.psum = PsumSource::File;
                d.from_file = true;
                if (cur_unsolved) d.write_node = st.current;
            } else {
                std::int32_t best = dag.node_count;
                int act = 0;
                if (cur_edge) {
                    best = st.current;
                    act = 1;
                }
                if (resume_edge >= 0 && resume_edge < best) {
                    best = resume_edge;
                    act = 2;
                }
                if (start_pos >= 0 && st.tasks[start_pos] < best) {
                    act = 3;
                }
                if (act == 1) {
                    d.kind = Decision::Edge;
                    d.node = st.current;
                    d.psum = PsumSource::Feedback;
                } else if (act == 2) {
                    d.kind = Decision::Edge;
                    d.node = resume_edge;
                    d.psum = PsumSource::File;
                    d.from_file = true;
                    if (cur_unsolved) d.write_node = st.current;
                } else if (act == 3) {
                    const std::int32_t v = st.tasks[start_pos];
                    ns[v].migrate(t);
                    d.node = v;
                    d.psum = PsumSource::Zero;
                    d.start_pos = start_pos;
                    d.kind = ns[v].avail.empty() ? Decision::Bupd : Decision::Edge;
                    if (cur_unsolved) d.write_node = st.current;
                } else if (start_denied) {
                    d.tag = NopTag::Pnop;
                } else if (st.remaining_owned == 0) {
                    d.tag = NopTag::Lnop;
                }
            }

            if (gather_icr) {
                icr_in[c].clear();
                if (d.kind == Decision::Edge)
                    icr_in[c].assign(ns[d.node].avail.begin(), ns[d.node].avail.end());
            }
            dec[c] = d;
        }

        // Reorder pass: pick which in-edge each CU computes this cycle so
        // that CUs needing the same source row act in the same cycle.
        std::vector<std::int32_t> chosen;
        if (gather_icr) chosen = icr_select(icr_in);

        std::int32_t executed = 0;
        for (std::int32_t c = 0; c < cu_count; ++c) {
            CuState& st = cu[c];
            const Decision& d = dec[c];
            if (d.kind == Decision::None) {
                st.em.nop(d.tag);
                continue;
            }
            ExecAction a;
            a.cycle = t;
            a.node = d.node;
            a.psum_src = d.psum;
            a.write_node = d.write_node;
            if (d.kind == Decision::Edge) {
                a.source = gather_icr ? chosen[c] : *ns[d.node].avail.begin();
                ns[d.node].avail.erase(a.source);
                ++ns[d.node].computed;
            } else {
                a.source = -1;
            }
            st.em.exec(a);
            ++executed;

            if (d.from_file) st.cached.erase(d.node);
            if (d.write_node >= 0) st.cached.insert(d.write_node);
            if (d.start_pos >= 0) {
                st.unstarted.erase(d.start_pos);
                st.ready.erase(d.start_pos);
            }
            st.current = d.node;
            st.current_solved = d.kind == Decision::Bupd;

            if (d.kind == Decision::Bupd) {
                s.completion[d.node] = t;
                --undone;
                --st.remaining_owned;
                for (std::int32_t w : dag.succs[d.node]) {
                    const std::int32_t cw = s.assignment[w];
                    if (cw < 0) continue;
                    ns[w].arrivals.emplace_back(t + 1, d.node);
                    if (cu[cw].unstarted.count(pos_of[w]))
                        cu[cw].ready_queue.emplace_back(t + 1, pos_of[w]);
                }
            }
        }
        if (executed == 0)
            throw Error("scheduler stalled with unsolved rows at cycle " + std::to_string(t));
    }

    s.total_cycles = t;
    s.cus.resize(cu_count);
    for (std::int32_t c = 0; c < cu_count; ++c) {
        cu[c].em.flush();
        s.cus[c] = std::move(cu[c].em.cu);
        s.cus[c].tasks = std::move(cu[c].tasks);
    }
    return s;
}

}  // namespace

std::vector<std::int32_t> allocate_nodes(const SolveDag& dag, std::int32_t cu_count,
                                         const std::vector<std::uint8_t>& presolved_mask) {
    if (cu_count < 1) throw Error("cu_count must be >= 1");
    std::vector<std::int32_t> assignment(dag.node_count, -1);
    std::int32_t next = 0;
    for (std::int32_t v = 0; v < dag.node_count; ++v) {
        if (!presolved_mask.empty() && presolved_mask[v]) continue;
        assignment[v] = next;
        next = (next + 1) % cu_count;
    }
    return assignment;
}

Schedule build_schedule(const SolveDag& dag, const ArchConfig& arch, const SchedulerOptions& opt) {
    arch.validate();
    const auto mask = presolved_mask_of(dag, opt.presolved);
    if (opt.dataflow == Dataflow::Coarse) return schedule_coarse(dag, arch.cu_count, mask);
    std::int32_t capacity = opt.psum_capacity < 0 ? arch.psum_words() : opt.psum_capacity;
    return schedule_medium(dag, arch.cu_count, capacity, opt.icr, mask);
}

std::vector<std::int32_t> icr_select(const std::vector<std::vector<std::int32_t>>& candidates) {
    const std::int32_t p = static_cast<std::int32_t>(candidates.size());
    std::vector<std::int32_t> result(p, -1);

    // R: how many CUs wanted each source over the whole cycle input; cnt: the
    // same count restricted to still-undecided CUs.
    std::unordered_map<std::int32_t, std::int32_t> full, cnt;
    std::int32_t undecided = 0;
    for (const auto& set : candidates) {
        if (set.empty()) continue;
        ++undecided;
        for (std::int32_t s : set) {
            ++full[s];
            ++cnt[s];
        }
    }

    // Rounds: most-shared source first; ties prefer the source that was less
    // wanted over the full cycle (keep widely needed rows for later cycles),
    // then the smaller row id. Lazy max-heap over (count, -R, -id).
    struct Entry {
        std::int32_t count, full_count, src;
        bool operator<(const Entry& o) const {
            if (count != o.count) return count < o.count;
            if (full_count != o.full_count) return full_count > o.full_count;
            return src > o.src;
        }
    };
    std::priority_queue<Entry> heap;
    for (const auto& [src, c] : cnt) heap.push({c, full[src], src});

    while (undecided > 0) {
        if (heap.empty()) throw Error("reorder selection underflow");
        Entry e = heap.top();
        heap.pop();
        auto it = cnt.find(e.src);
        if (it == cnt.end() || it->second != e.count || e.count == 0) continue;  // stale
        cnt.erase(it);
        for (std::int32_t c = 0; c < p; ++c) {
            if (result[c] >= 0 || candidates[c].empty()) continue;
            if (!std::binary_search(candidates[c].begin(), candidates[c].end(), e.src)) continue;
            result[c] = e.src;
            --undecided;
            for (std::int32_t s : candidates[c]) {
                if (s == e.src) continue;
                auto jt = cnt.find(s);
                if (jt == cnt.end()) continue;
                if (--jt->second == 0)
                    cnt.erase(jt);
                else
                    heap.push({jt->second, full[s], s});
            }
        }
    }
    return result;
}

}  // namespace sptrsv
