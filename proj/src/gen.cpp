#include "sptrsv/gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sptrsv {

CsrMatrix gen_chain(std::int32_t n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(n) * 2);
    for (std::int32_t i = 0; i < n; ++i) {
        if (i > 0) t.push_back({i, i - 1, -1.0f});
        t.push_back({i, i, 1.0f});
    }
    return matrix_from_triplets(n, std::move(t));
}

CsrMatrix gen_fanin(std::int32_t k) {
    const std::int32_t n = k + 1;
    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(n) * 2);
    for (std::int32_t i = 0; i < k; ++i) t.push_back({i, i, 1.0f});
    for (std::int32_t j = 0; j < k; ++j) t.push_back({k, j, -1.0f});
    t.push_back({k, k, 1.0f});
    return matrix_from_triplets(n, std::move(t));
}

CsrMatrix gen_diagonal(std::int32_t n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) t.push_back({i, i, 1.0f});
    return matrix_from_triplets(n, std::move(t));
}

CsrMatrix gen_banded(std::int32_t n, std::int32_t band) {
    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(n) * (static_cast<size_t>(band) + 1));
    for (std::int32_t i = 0; i < n; ++i) {
        const std::int32_t lo = std::max<std::int32_t>(0, i - band);
        float absum = 0.0f;
        for (std::int32_t j = lo; j < i; ++j) {
            t.push_back({i, j, -0.5f});
            absum += 0.5f;
        }
        t.push_back({i, i, 1.0f + absum});
    }
    return matrix_from_triplets(n, std::move(t));
}

CsrMatrix gen_random_lower(std::int32_t n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<Triplet> t;
    for (std::int32_t i = 0; i < n; ++i) {
        double absum = 0.0;
        for (std::int32_t j = 0; j < i; ++j) {
            if (unit(rng) < density) {
                const auto v = static_cast<float>(val(rng));
                t.push_back({i, j, v});
                absum += std::fabs(static_cast<double>(v));
            }
        }
        t.push_back({i, i, static_cast<float>(1.0 + absum)});
    }
    return matrix_from_triplets(n, std::move(t));
}

}  // namespace sptrsv
