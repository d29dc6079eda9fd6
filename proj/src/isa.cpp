#include "sptrsv/isa.hpp"

#include <cstring>
#include <fstream>
#include <unordered_set>

namespace sptrsv {

namespace {

// MSB-first bit cursor over a byte buffer.
struct BitWriter {
    std::uint8_t* buf;
    std::int64_t pos;  // absolute bit index
    void put(std::uint64_t value, std::int32_t width, const char* field) {
        if (width < 64 && value >= (std::uint64_t{1} << width))
            throw Error(std::string("instruction field overflow: ") + field);
        for (std::int32_t i = width - 1; i >= 0; --i) {
            const std::int64_t p = pos++;
            const std::uint8_t mask = static_cast<std::uint8_t>(1u << (7 - (p & 7)));
            if ((value >> i) & 1)
                buf[p >> 3] |= mask;
            else
                buf[p >> 3] &= static_cast<std::uint8_t>(~mask);
        }
    }
};

struct BitReader {
    const std::uint8_t* buf;
    std::int64_t pos;
    std::uint64_t get(std::int32_t width) {
        std::uint64_t v = 0;
        for (std::int32_t i = 0; i < width; ++i) {
            const std::int64_t p = pos++;
            v = (v << 1) | ((buf[p >> 3] >> (7 - (p & 7))) & 1u);
        }
        return v;
    }
};

}  // namespace

std::int32_t slice_bits(const ArchConfig& cfg) {
    return 6 + cfg.k_log2 + cfg.m_log2 + cfg.t_log2 + 2 * (cfg.sel_bits() + 1) + 1 + 2 + 2;
}

std::int32_t word_bytes(const ArchConfig& cfg) {
    const std::int64_t bits = static_cast<std::int64_t>(slice_bits(cfg)) * cfg.cu_count;
    return static_cast<std::int32_t>((bits + 7) / 8);
}

void encode_slice(const CuInstruction& s, const ArchConfig& cfg, std::int32_t cu,
                  std::uint8_t* word) {
    const std::int32_t n = cfg.sel_bits();
    BitWriter w{word, static_cast<std::int64_t>(cu) * slice_bits(cfg)};
    w.put(s.psum_read_en, 1, "psum_read_en");
    w.put(s.psum_write_en, 1, "psum_write_en");
    w.put(s.psum_read_addr, cfg.k_log2, "psum_read_addr");
    w.put(s.xi_read_en, 1, "xi_read_en");
    w.put(s.xi_write_en, 1, "xi_write_en");
    w.put(s.xi_read_addr, cfg.m_log2, "xi_read_addr");
    w.put(s.xi_release, 1, "xi_release");
    w.put(s.dm_read_en, 1, "dm_read_en");
    w.put(s.dm_write_en, 1, "dm_write_en");
    w.put(s.dm_read_addr, cfg.t_log2, "dm_read_addr");
    w.put(s.in_valid, 1, "in_valid");
    w.put(s.in_sel, n, "in_sel");
    w.put(s.out_valid, 1, "out_valid");
    w.put(s.out_sel, n, "out_sel");
    w.put(s.s34, 2, "s34");
    w.put(s.pe_ctl, 2, "pe_ctl");
}

CuInstruction decode_slice(const ArchConfig& cfg, std::int32_t cu,
                           const std::uint8_t* word) {
    const std::int32_t n = cfg.sel_bits();
    BitReader r{word, static_cast<std::int64_t>(cu) * slice_bits(cfg)};
    CuInstruction s;
    s.psum_read_en = r.get(1);
    s.psum_write_en = r.get(1);
    s.psum_read_addr = static_cast<std::uint32_t>(r.get(cfg.k_log2));
    s.xi_read_en = r.get(1);
    s.xi_write_en = r.get(1);
    s.xi_read_addr = static_cast<std::uint32_t>(r.get(cfg.m_log2));
    s.xi_release = r.get(1);
    s.dm_read_en = r.get(1);
    s.dm_write_en = r.get(1);
    s.dm_read_addr = static_cast<std::uint32_t>(r.get(cfg.t_log2));
    s.in_valid = r.get(1);
    s.in_sel = static_cast<std::uint32_t>(r.get(n));
    s.out_valid = r.get(1);
    s.out_sel = static_cast<std::uint32_t>(r.get(n));
    s.s34 = static_cast<std::uint32_t>(r.get(2));
    s.pe_ctl = static_cast<std::uint32_t>(r.get(2));
    return s;
}

ProgramCheck validate_program(const Program& p) {
    p.arch.validate();
    const std::int32_t cus = p.arch.cu_count;
    const std::int32_t wb = word_bytes(p.arch);
    if (p.words.size() != static_cast<size_t>(p.total_cycles) * static_cast<size_t>(wb))
        throw Error("program word section length does not match total_cycles");
    if (p.l_streams.size() != static_cast<size_t>(cus) ||
        p.b_streams.size() != static_cast<size_t>(cus) ||
        p.tag_runs.size() != static_cast<size_t>(cus))
        throw Error("program per-unit section count does not match cu_count");

    std::vector<std::int64_t> execs(cus, 0), solves(cus, 0);
    std::vector<size_t> run_idx(cus, 0);
    std::vector<std::int64_t> run_left(cus, 0);
    for (std::int64_t t = 0; t < p.total_cycles; ++t) {
        const std::uint8_t* word = p.words.data() + t * wb;
        for (std::int32_t c = 0; c < cus; ++c) {
            const CuInstruction s = decode_slice(p.arch, c, word);
            if (s.pe_ctl == 3)
                throw Error("reserved pe_ctl value at cycle " + std::to_string(t + 1) +
                            " unit " + std::to_string(c));
            const bool active = s.pe_ctl != kPeIdle;
            if (active) {
                ++execs[c];
                if (s.pe_ctl == kPeSolve) ++solves[c];
            }
            if (run_left[c] == 0) {
                if (run_idx[c] >= p.tag_runs[c].size())
                    throw Error("tag sidecar ends early for unit " + std::to_string(c));
                const TagRun& r = p.tag_runs[c][run_idx[c]++];
                if (r.kind > kTagExecute || r.count <= 0)
                    throw Error("malformed tag run for unit " + std::to_string(c));
                run_left[c] = r.count;
            }
            const std::uint8_t kind = p.tag_runs[c][run_idx[c] - 1].kind;
            if ((kind == kTagExecute) != active)
                throw Error("tag sidecar disagrees with pe_ctl at cycle " +
                            std::to_string(t + 1) + " unit " + std::to_string(c));
            --run_left[c];
        }
    }
    for (std::int32_t c = 0; c < cus; ++c) {
        if (run_left[c] != 0 || run_idx[c] != p.tag_runs[c].size())
            throw Error("tag sidecar does not tile the timeline for unit " + std::to_string(c));
        if (p.l_streams[c].size() != static_cast<size_t>(execs[c]))
            throw Error("l-stream length mismatch for unit " + std::to_string(c));
        if (p.b_streams[c].size() != static_cast<size_t>(solves[c]))
            throw Error("b-stream length mismatch for unit " + std::to_string(c));
    }
    if (p.out_perm.size() != static_cast<size_t>(p.n))
        throw Error("output permutation length does not match n");
    std::vector<std::uint8_t> seen(static_cast<size_t>(p.n), 0);
    for (std::int32_t r : p.out_perm) {
        if (r < 0 || r >= p.n || seen[static_cast<size_t>(r)])
            throw Error("output permutation is not a bijection onto [0, n)");
        seen[static_cast<size_t>(r)] = 1;
    }

    ProgramCheck chk;
    chk.imem_words = p.total_cycles;
    for (std::int32_t c = 0; c < cus; ++c) {
        const std::int64_t words =
            static_cast<std::int64_t>(p.l_streams[c].size() + p.b_streams[c].size());
        chk.max_stream_words = std::max(chk.max_stream_words, words);
    }
    if (chk.imem_words > kInstructionMemoryWords)
        chk.warnings.push_back("program needs " + std::to_string(chk.imem_words) +
                               " instruction words; modeled memory holds " +
                               std::to_string(kInstructionMemoryWords));
    if (chk.max_stream_words > kStreamMemoryWords)
        chk.warnings.push_back("a unit streams " + std::to_string(chk.max_stream_words) +
                               " words; modeled stream memory holds " +
                               std::to_string(kStreamMemoryWords));
    return chk;
}

namespace {

constexpr char kMagic[5] = {'S', 'P', 'T', 'V', '1'};

template <typename T>
void put_raw(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_raw(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw Error("truncated program container");
    return v;
}

}  // namespace

void write_program(const Program& p, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(p.arch.cu_count));
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(p.arch.m_log2));
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(p.arch.k_log2));
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(p.arch.t_log2));
    put_raw<double>(os, p.arch.clock_hz);
    put_raw<std::uint8_t>(os, p.arch.ideal_mode ? 1 : 0);
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(p.n));
    put_raw<std::uint64_t>(os, static_cast<std::uint64_t>(p.nnz));
    put_raw<std::int64_t>(os, p.total_cycles);
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(slice_bits(p.arch)));
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(word_bytes(p.arch)));
    put_raw<std::uint32_t>(os, static_cast<std::uint32_t>(p.matrix_name.size()));
    os.write(p.matrix_name.data(), static_cast<std::streamsize>(p.matrix_name.size()));
    os.write(reinterpret_cast<const char*>(p.words.data()),
             static_cast<std::streamsize>(p.words.size()));
    auto put_floats = [&os](const std::vector<float>& v) {
        put_raw<std::uint64_t>(os, v.size());
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(float)));
    };
    for (const auto& s : p.l_streams) put_floats(s);
    for (const auto& s : p.b_streams) put_floats(s);
    put_raw<std::uint64_t>(os, p.out_perm.size());
    os.write(reinterpret_cast<const char*>(p.out_perm.data()),
             static_cast<std::streamsize>(p.out_perm.size() * sizeof(std::int32_t)));
    for (const auto& runs : p.tag_runs) {
        put_raw<std::uint64_t>(os, runs.size());
        for (const TagRun& r : runs) {
            put_raw<std::uint8_t>(os, r.kind);
            put_raw<std::int64_t>(os, r.count);
        }
    }
    if (!os) throw Error("write failed: " + path);
}

Program read_program(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open program container: " + path);
    char magic[5];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error("bad program container magic (want SPTV1): " + path);
    Program p;
    p.arch.cu_count = static_cast<std::int32_t>(get_raw<std::uint32_t>(is));
    p.arch.m_log2 = static_cast<std::int32_t>(get_raw<std::uint32_t>(is));
    p.arch.k_log2 = static_cast<std::int32_t>(get_raw<std::uint32_t>(is));
    p.arch.t_log2 = static_cast<std::int32_t>(get_raw<std::uint32_t>(is));
    p.arch.clock_hz = get_raw<double>(is);
    p.arch.ideal_mode = get_raw<std::uint8_t>(is) != 0;
    p.arch.validate();
    p.n = static_cast<std::int32_t>(get_raw<std::uint32_t>(is));
    p.nnz = static_cast<std::int64_t>(get_raw<std::uint64_t>(is));
    p.total_cycles = get_raw<std::int64_t>(is);
    const auto sb = get_raw<std::uint32_t>(is);
    const auto wb = get_raw<std::uint32_t>(is);
    if (sb != static_cast<std::uint32_t>(slice_bits(p.arch)) ||
        wb != static_cast<std::uint32_t>(word_bytes(p.arch)))
        throw Error("program container slice geometry mismatch (format version skew)");
    const auto name_len = get_raw<std::uint32_t>(is);
    p.matrix_name.resize(name_len);
    is.read(p.matrix_name.data(), name_len);
    if (!is) throw Error("truncated program container");
    if (p.total_cycles < 0) throw Error("negative cycle count in container");
    p.words.resize(static_cast<size_t>(p.total_cycles) * wb);
    is.read(reinterpret_cast<char*>(p.words.data()),
            static_cast<std::streamsize>(p.words.size()));
    if (!is && !p.words.empty()) throw Error("truncated program container");
    auto get_floats = [&is]() {
        const auto count = get_raw<std::uint64_t>(is);
        std::vector<float> v(count);
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
        if (!is && count) throw Error("truncated program container");
        return v;
    };
    p.l_streams.resize(static_cast<size_t>(p.arch.cu_count));
    for (auto& s : p.l_streams) s = get_floats();
    p.b_streams.resize(static_cast<size_t>(p.arch.cu_count));
    for (auto& s : p.b_streams) s = get_floats();
    const auto perm_len = get_raw<std::uint64_t>(is);
    p.out_perm.resize(perm_len);
    is.read(reinterpret_cast<char*>(p.out_perm.data()),
            static_cast<std::streamsize>(perm_len * sizeof(std::int32_t)));
    if (!is && perm_len) throw Error("truncated program container");
    p.tag_runs.resize(static_cast<size_t>(p.arch.cu_count));
    for (auto& runs : p.tag_runs) {
        const auto count = get_raw<std::uint64_t>(is);
        runs.resize(count);
        for (TagRun& r : runs) {
            r.kind = get_raw<std::uint8_t>(is);
            r.count = get_raw<std::int64_t>(is);
        }
    }
    return p;
}

}  // namespace sptrsv
