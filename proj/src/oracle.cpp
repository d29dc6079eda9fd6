#include "sptrsv/oracle.hpp"

#include <cmath>
#include <cstdlib>

namespace sptrsv {

namespace {

void check_rhs(const CsrMatrix& m, const Rhs& b) {
    if (b.b.size() != static_cast<size_t>(m.n))
        throw Error("right-hand side length " + std::to_string(b.b.size()) +
                    " does not match matrix dimension " + std::to_string(m.n));
}

}  // namespace

Solution solve_serial(const CsrMatrix& m, const Rhs& b) {
    check_rhs(m, b);
    Solution s;
    s.x.assign(static_cast<size_t>(m.n), 0.0f);
    for (std::int32_t i = 0; i < m.n; ++i) {
        float sum = 0.0f;
        std::int32_t k = m.rowptr[i];
        const std::int32_t end = m.rowptr[i + 1] - 1;  // diagonal is last
        for (; k < end; ++k) sum += m.value[k] * s.x[static_cast<size_t>(m.colidx[k])];
        s.x[static_cast<size_t>(i)] = (b.b[static_cast<size_t>(i)] - sum) / m.value[end];
    }
    return s;
}

Solution solve_dense_bruteforce(const CsrMatrix& m, const Rhs& b) {
    check_rhs(m, b);
    if (m.n > 4096) throw Error("dense oracle limited to n <= 4096");
    const auto n = static_cast<size_t>(m.n);
    std::vector<double> dense(n * n, 0.0);
    for (std::int32_t i = 0; i < m.n; ++i)
        for (std::int32_t k = m.rowptr[i]; k < m.rowptr[i + 1]; ++k)
            dense[static_cast<size_t>(i) * n + static_cast<size_t>(m.colidx[k])] =
                static_cast<double>(m.value[k]);
    std::vector<double> x(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (size_t j = 0; j < i; ++j) sum += dense[i * n + j] * x[j];
        x[i] = (static_cast<double>(b.b[i]) - sum) / dense[i * n + i];
    }
    Solution s;
    s.x.reserve(n);
    for (double v : x) s.x.push_back(static_cast<float>(v));
    return s;
}

double max_rel_error(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) return HUGE_VAL;
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double av = static_cast<double>(a[i]);
        const double bv = static_cast<double>(b[i]);
        if (!std::isfinite(av) || !std::isfinite(bv)) return HUGE_VAL;
        const double scale = std::max({1.0, std::fabs(av), std::fabs(bv)});
        worst = std::max(worst, std::fabs(av - bv) / scale);
    }
    return worst;
}

}  // namespace sptrsv
