#include "sptrsv/graph.hpp"

#include <algorithm>
#include <cmath>

namespace sptrsv {

SolveDag build_dag(const CsrMatrix& m) {
    SolveDag d;
    d.node_count = m.n;
    d.nnz = m.nnz;
    d.preds.resize(static_cast<size_t>(m.n));
    d.succs.resize(static_cast<size_t>(m.n));
    d.indegree.assign(static_cast<size_t>(m.n), 0);
    d.level_of.assign(static_cast<size_t>(m.n), 0);
    d.diag.resize(static_cast<size_t>(m.n));
    std::int32_t max_level = -1;
    for (std::int32_t v = 0; v < m.n; ++v) {
        const std::int32_t end = m.rowptr[v + 1] - 1;
        std::int32_t lvl = -1;
        for (std::int32_t k = m.rowptr[v]; k < end; ++k) {
            const std::int32_t u = m.colidx[k];
            d.preds[static_cast<size_t>(v)].push_back({u, m.value[k]});
            d.succs[static_cast<size_t>(u)].push_back(v);
            lvl = std::max(lvl, d.level_of[static_cast<size_t>(u)]);
        }
        d.indegree[static_cast<size_t>(v)] =
            static_cast<std::int32_t>(d.preds[static_cast<size_t>(v)].size());
        d.level_of[static_cast<size_t>(v)] = lvl + 1;
        d.diag[static_cast<size_t>(v)] = m.value[end];
        max_level = std::max(max_level, lvl + 1);
    }
    d.level_sizes.assign(static_cast<size_t>(max_level) + 1, 0);
    for (std::int32_t v = 0; v < m.n; ++v) ++d.level_sizes[static_cast<size_t>(d.level_of[static_cast<size_t>(v)])];
    return d;
}

CduMetrics cdu_metrics(const SolveDag& d, std::int32_t p, double threshold_fraction) {
    CduMetrics m;
    if (d.node_count == 0) return m;
    const double threshold = threshold_fraction * static_cast<double>(p);
    std::int64_t cdu_nodes = 0, cdu_edges = 0, cdu_levels = 0, total_edges = 0;
    for (std::int32_t v = 0; v < d.node_count; ++v) {
        const bool cdu =
            static_cast<double>(d.level_sizes[static_cast<size_t>(d.level_of[static_cast<size_t>(v)])]) <
            threshold;
        const auto indeg = static_cast<std::int64_t>(d.indegree[static_cast<size_t>(v)]);
        total_edges += indeg;
        if (cdu) {
            ++cdu_nodes;
            cdu_edges += indeg;
        }
    }
    for (auto sz : d.level_sizes)
        if (static_cast<double>(sz) < threshold) ++cdu_levels;
    m.cdu_node_ratio = 100.0 * static_cast<double>(cdu_nodes) / static_cast<double>(d.node_count);
    m.cdu_edge_ratio =
        total_edges == 0 ? 0.0
                         : 100.0 * static_cast<double>(cdu_edges) / static_cast<double>(total_edges);
    m.cdu_level_ratio =
        100.0 * static_cast<double>(cdu_levels) / static_cast<double>(d.level_sizes.size());
    m.edges_per_cdu_node =
        cdu_nodes == 0 ? 0.0 : static_cast<double>(cdu_edges) / static_cast<double>(cdu_nodes);
    return m;
}

std::int64_t binary_node_count(const CsrMatrix& m) {
    return 2 * static_cast<std::int64_t>(m.nnz) - static_cast<std::int64_t>(m.n);
}

double peak_throughput_gops(std::int32_t n, std::int64_t nnz, std::int32_t p, double clock_hz) {
    const double ops_fraction = 1.0 - static_cast<double>(n) / (2.0 * static_cast<double>(nnz));
    return 2.0 * static_cast<double>(p) * clock_hz * ops_fraction / 1e9;
}

double load_balance_degree(const std::vector<std::int32_t>& assignment, const SolveDag& d,
                           std::int32_t cu_count) {
    std::vector<double> load(static_cast<size_t>(cu_count), 0.0);
    for (std::int32_t v = 0; v < d.node_count; ++v)
        load[static_cast<size_t>(assignment[static_cast<size_t>(v)])] +=
            static_cast<double>(d.indegree[static_cast<size_t>(v)]);
    double mean = 0.0;
    for (double l : load) mean += l;
    mean /= static_cast<double>(cu_count);
    if (mean == 0.0) return 0.0;
    double var = 0.0;
    for (double l : load) var += (l - mean) * (l - mean);
    var /= static_cast<double>(cu_count);
    return 100.0 * std::sqrt(var) / mean;
}

}  // namespace sptrsv
