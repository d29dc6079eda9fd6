#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "sptrsv/graph.hpp"
#include "sptrsv/matrix.hpp"
#include "sptrsv/schedule.hpp"

namespace sptrsv::testing {

inline CsrMatrix five_row_system() {
    return matrix_from_triplets(5, {
                                       {0, 0, 1.0f},
                                       {1, 1, 1.0f},
                                       {2, 0, -1.0f},
                                       {2, 1, -1.0f},
                                       {2, 2, 1.0f},
                                       {3, 0, -1.0f},
                                       {3, 2, -1.0f},
                                       {3, 3, 1.0f},
                                       {4, 1, -1.0f},
                                       {4, 4, 1.0f},
                                   });
}

/// Three presolvable roots feeding a three-stage pipeline:
/// rows 3 {0,1,2}, 4 {0,1,3}, 5 {1,2,4}.
inline CsrMatrix staged_pipeline_system() {
    return matrix_from_triplets(6, {
                                       {0, 0, 1.0f},
                                       {1, 1, 1.0f},
                                       {2, 2, 1.0f},
                                       {3, 0, -1.0f},
                                       {3, 1, -1.0f},
                                       {3, 2, -1.0f},
                                       {3, 3, 1.0f},
                                       {4, 0, -1.0f},
                                       {4, 1, -1.0f},
                                       {4, 3, -1.0f},
                                       {4, 4, 1.0f},
                                       {5, 1, -1.0f},
                                       {5, 2, -1.0f},
                                       {5, 4, -1.0f},
                                       {5, 5, 1.0f},
                                   });
}

/// Structural audit of a schedule against its DAG: timelines tile cycles
/// 1..total exactly; every owned row computes each in-edge once and solves
/// once, after all edges and at least one cycle after each source row solves;
/// partial-sum file traffic replays to a consistent parked set within
/// capacity.
inline void check_schedule_wellformed(const SolveDag& dag, const Schedule& s) {
    REQUIRE(static_cast<std::int32_t>(s.assignment.size()) == dag.node_count);
    REQUIRE(static_cast<std::int32_t>(s.completion.size()) == dag.node_count);

    std::vector<std::int32_t> edges_seen(dag.node_count, 0);
    std::vector<std::int8_t> solved(dag.node_count, 0);
    std::vector<std::set<std::int32_t>> computed_srcs(dag.node_count);

    for (std::size_t c = 0; c < s.cus.size(); ++c) {
        const CuSchedule& cu = s.cus[c];
        // Tiling: executes at their cycles, nop runs filling every gap.
        std::int64_t cycle = 1;
        std::size_t e = 0;
        std::int64_t nop_cycles = 0;
        for (const NopRun& run : cu.nops) {
            REQUIRE(run.count > 0);
            nop_cycles += run.count;
        }
        REQUIRE(static_cast<std::int64_t>(cu.execs.size()) + nop_cycles == s.total_cycles);
        for (const ExecAction& a : cu.execs) {
            REQUIRE(a.cycle >= cycle);
            cycle = a.cycle + 1;
            ++e;
        }
        REQUIRE(cycle <= s.total_cycles + 1);

        // Per-CU replay of ownership, accumulation state, and file traffic.
        std::set<std::int32_t> owned(cu.tasks.begin(), cu.tasks.end());
        std::set<std::int32_t> parked;
        std::set<std::int32_t> touched;
        std::int32_t current = -1;
        bool current_solved = true;
        for (const ExecAction& a : cu.execs) {
            REQUIRE(owned.count(a.node));
            REQUIRE(s.assignment[a.node] == static_cast<std::int32_t>(c));

            if (a.write_node >= 0) {
                REQUIRE(a.write_node == current);
                REQUIRE(!current_solved);
                REQUIRE(!parked.count(a.write_node));
            }
            switch (a.psum_src) {
                case PsumSource::Zero:
                    REQUIRE(!touched.count(a.node));
                    break;
                case PsumSource::Feedback:
                    REQUIRE(a.node == current);
                    REQUIRE(!current_solved);
                    break;
                case PsumSource::File:
                    REQUIRE(parked.count(a.node));
                    parked.erase(a.node);
                    break;
            }
            if (a.write_node >= 0) {
                parked.insert(a.write_node);
                REQUIRE(static_cast<std::int32_t>(parked.size()) <= s.psum_capacity);
            }
            touched.insert(a.node);
            current = a.node;

            if (a.source >= 0) {
                current_solved = false;
                ++edges_seen[a.node];
                // Each in-edge computed once, and it must exist in the DAG.
                REQUIRE(computed_srcs[a.node].insert(a.source).second);
                const auto& pr = dag.preds[a.node];
                REQUIRE(std::any_of(pr.begin(), pr.end(),
                                    [&](const DagEdge& de) { return de.src == a.source; }));
                // The source row must have solved at least one cycle earlier.
                REQUIRE(s.completion[a.source] >= 0);
                REQUIRE(s.completion[a.source] + 1 <= a.cycle);
            } else {
                REQUIRE(!solved[a.node]);
                REQUIRE(edges_seen[a.node] == dag.indegree[a.node]);
                REQUIRE(s.completion[a.node] == a.cycle);
                solved[a.node] = 1;
                current_solved = true;
            }
        }
        REQUIRE(parked.empty());
    }

    for (std::int32_t v = 0; v < dag.node_count; ++v) {
        if (s.assignment[v] < 0) {
            CHECK(s.completion[v] == 0);  // presolved
        } else {
            CHECK(solved[v] == 1);
            CHECK(edges_seen[v] == dag.indegree[v]);
        }
    }
}

}  // namespace sptrsv::testing
