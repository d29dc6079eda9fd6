#include "sptrsv/matrix.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sptrsv {

CsrMatrix matrix_from_triplets(std::int32_t n, std::vector<Triplet> entries) {
    if (n <= 0) throw Error("matrix dimension must be positive");
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw Error("entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                        ") out of range for n=" + std::to_string(n));
        if (t.col > t.row)
            throw Error("upper-triangular entry (" + std::to_string(t.row) + "," +
                        std::to_string(t.col) + ") in lower-triangular system");
    }
    // Sort by (row, col) and sum duplicates; this makes the result independent
    // of input entry order.
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Triplet> merged;
    merged.reserve(entries.size());
    for (const auto& t : entries) {
        if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col)
            merged.back().val += t.val;
        else
            merged.push_back(t);
    }

    CsrMatrix m;
    m.n = n;
    m.rowptr.assign(static_cast<size_t>(n) + 1, 0);
    m.colidx.reserve(merged.size());
    m.value.reserve(merged.size());
    size_t at = 0;
    for (std::int32_t row = 0; row < n; ++row) {
        bool saw_diag = false;
        float diag_val = 0.0f;
        while (at < merged.size() && merged[at].row == row) {
            if (merged[at].col == row) {
                saw_diag = true;
                diag_val = merged[at].val;
            } else {
                m.colidx.push_back(merged[at].col);
                m.value.push_back(merged[at].val);
            }
            ++at;
        }
        if (!saw_diag) throw Error("row " + std::to_string(row) + " has no diagonal entry");
        if (diag_val == 0.0f) throw Error("row " + std::to_string(row) + " has zero diagonal");
        m.colidx.push_back(row);  // diagonal last
        m.value.push_back(diag_val);
        m.rowptr[static_cast<size_t>(row) + 1] = static_cast<std::int32_t>(m.colidx.size());
    }
    m.nnz = static_cast<std::int32_t>(m.colidx.size());
    return m;
}

namespace {

struct MmHeader {
    bool pattern = false;
    bool symmetric = false;
};

MmHeader parse_mm_banner(const std::string& line, const std::string& path) {
    std::istringstream ss(line);
    std::string tag, object, format, field, symmetry;
    ss >> tag >> object >> format >> field >> symmetry;
    auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    if (tag != "%%MatrixMarket" || lower(object) != "matrix")
        throw Error(path + ": not a Matrix Market matrix file");
    if (lower(format) != "coordinate")
        throw Error(path + ": only coordinate format is supported");
    field = lower(field);
    symmetry = lower(symmetry);
    if (field != "real" && field != "integer" && field != "pattern")
        throw Error(path + ": unsupported value field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw Error(path + ": unsupported symmetry '" + symmetry + "'");
    return MmHeader{field == "pattern", symmetry == "symmetric"};
}

}  // namespace

CsrMatrix load_matrix_market(const std::string& path, bool lower_extract) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty file");
    MmHeader hdr = parse_mm_banner(line, path);

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream dims(line);
    long long rows = 0, cols = 0, count = 0;
    if (!(dims >> rows >> cols >> count)) throw Error(path + ": malformed size line");
    if (rows != cols) throw Error(path + ": matrix is not square");
    if (rows <= 0 || rows > (1 << 30)) throw Error(path + ": unsupported dimension");
    const auto n = static_cast<std::int32_t>(rows);

    std::vector<Triplet> entries;
    entries.reserve(static_cast<size_t>(count));
    std::vector<char> diag_seen(static_cast<size_t>(n), 0);
    for (long long k = 0; k < count; ++k) {
        if (!std::getline(in, line)) throw Error(path + ": truncated entry list");
        std::istringstream es(line);
        long long r = 0, c = 0;
        double v = 0.0;
        if (!(es >> r >> c)) throw Error(path + ": malformed entry line " + std::to_string(k + 1));
        if (hdr.pattern) {
            v = (r == c) ? 1.0 : -1.0;
        } else if (!(es >> v)) {
            throw Error(path + ": missing value on entry line " + std::to_string(k + 1));
        }
        if (r < 1 || r > n || c < 1 || c > n)
            throw Error(path + ": index out of range on entry line " + std::to_string(k + 1));
        const auto row = static_cast<std::int32_t>(r - 1);
        const auto col = static_cast<std::int32_t>(c - 1);
        if (lower_extract) {
            if (col > row) continue;  // drop strict upper part
        } else if (col > row) {
            throw Error(path + ": upper-triangular entry at (" + std::to_string(r) + "," +
                        std::to_string(c) + ")");
        }
        // Symmetric storage holds one triangle; its mirror is upper and is
        // dropped by extraction, so no mirroring is needed for lower solves.
        if (row == col) diag_seen[static_cast<size_t>(row)] = 1;
        entries.push_back(Triplet{row, col, static_cast<float>(v)});
    }

    if (lower_extract) {
        // Force a usable diagonal: add where missing, replace where zero.
        std::vector<double> diag_sum(static_cast<size_t>(n), 0.0);
        for (const auto& t : entries)
            if (t.row == t.col) diag_sum[static_cast<size_t>(t.row)] += t.val;
        std::vector<Triplet> kept;
        kept.reserve(entries.size() + static_cast<size_t>(n));
        for (const auto& t : entries)
            if (t.row != t.col) kept.push_back(t);
        for (std::int32_t i = 0; i < n; ++i) {
            const double d = diag_sum[static_cast<size_t>(i)];
            const bool usable = diag_seen[static_cast<size_t>(i)] && d != 0.0;
            kept.push_back(Triplet{i, i, usable ? static_cast<float>(d) : 1.0f});
        }
        entries = std::move(kept);
    }
    return matrix_from_triplets(n, std::move(entries));
}

Rhs load_rhs(const std::string& path, std::int32_t n) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    Rhs rhs;
    double v = 0.0;
    while (in >> v) rhs.b.push_back(static_cast<float>(v));
    if (static_cast<std::int32_t>(rhs.b.size()) != n)
        throw Error(path + ": expected " + std::to_string(n) + " values, got " +
                    std::to_string(rhs.b.size()));
    return rhs;
}

Rhs ones_rhs(std::int32_t n) {
    Rhs r;
    r.b.assign(static_cast<size_t>(n), 1.0f);
    return r;
}

CsrMatrix precompute_reciprocals(const CsrMatrix& m) {
    CsrMatrix out = m;
    for (std::int32_t i = 0; i < m.n; ++i) {
        const auto d = static_cast<size_t>(m.rowptr[i + 1] - 1);
        out.value[d] = 1.0f / m.value[d];
    }
    return out;
}

void write_matrix_market(const CsrMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.n << " " << m.n << " " << m.nnz << "\n";
    char buf[64];
    for (std::int32_t i = 0; i < m.n; ++i) {
        for (std::int32_t k = m.rowptr[i]; k < m.rowptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.9g\n", i + 1, m.colidx[k] + 1,
                          static_cast<double>(m.value[k]));
            out << buf;
        }
    }
    if (!out) throw Error("write failed for " + path);
}

}  // namespace sptrsv
