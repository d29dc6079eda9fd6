#pragma once

#include <cstdint>
#include <vector>

#include "sptrsv/matrix.hpp"

namespace sptrsv {

struct DagEdge {
    std::int32_t src = 0;  // predecessor row (src < dst)
    float val = 0.0f;      // L[dst][src]
};

/// Row dependency DAG: one node per row, one edge per off-diagonal non-zero.
/// Edges run from lower to higher row index, so ascending node id is a
/// topological order.
struct SolveDag {
    std::int32_t node_count = 0;
    std::int32_t nnz = 0;
    std::vector<std::vector<DagEdge>> preds;   // per node, ascending src
    std::vector<std::vector<std::int32_t>> succs;
    std::vector<std::int32_t> indegree;
    std::vector<std::int32_t> level_of;        // 0 for roots, else 1+max pred level
    std::vector<std::int32_t> level_sizes;
    std::vector<float> diag;                   // original diagonal values per row
};

struct CduMetrics {
    double cdu_node_ratio = 0.0;    // percent
    double cdu_edge_ratio = 0.0;    // percent
    double cdu_level_ratio = 0.0;   // percent
    double edges_per_cdu_node = 0.0;
};

SolveDag build_dag(const CsrMatrix& m);

/// A node is coarse-dataflow-unfriendly when its level holds fewer than
/// threshold_fraction*p nodes (strict, unrounded product). An edge is CDU when
/// its destination is; a level is CDU when its size is below threshold.
CduMetrics cdu_metrics(const SolveDag& d, std::int32_t p, double threshold_fraction = 0.20);

std::int64_t binary_node_count(const CsrMatrix& m);

/// Throughput ceiling in GOPS: (2*p*clock_hz)*(1 - n/(2*nnz)) / 1e9.
double peak_throughput_gops(std::int32_t n, std::int64_t nnz, std::int32_t p, double clock_hz);

/// Coefficient of variation (percent) of per-CU input-edge counts under the
/// given node->CU assignment; population standard deviation.
double load_balance_degree(const std::vector<std::int32_t>& assignment, const SolveDag& d,
                           std::int32_t cu_count);

}  // namespace sptrsv
