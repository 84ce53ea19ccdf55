#include "checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace aka {
namespace {

constexpr char kMagic[8] = {'A', 'K', 'A', 'C', 'K', 'P', '0', '1'};

void write_u64(std::ostream& os, uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    const uint64_t n = read_u64(is);
    if (n > (1ULL << 30)) throw std::runtime_error("checkpoint: corrupt string length");
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    for (double x : v) {
        uint64_t bits;
        std::memcpy(&bits, &x, 8);
        write_u64(os, bits);
    }
}

}  // namespace

int64_t Checkpoint::meta_int(const std::string& key) const {
    auto it = metadata.find(key);
    if (it == metadata.end()) throw std::runtime_error("checkpoint: missing metadata key " + key);
    return std::stoll(it->second);
}

const Matrix& Checkpoint::tensor(const std::string& key) const {
    auto it = tensors.find(key);
    if (it == tensors.end()) throw std::runtime_error("checkpoint: missing tensor " + key);
    return it->second;
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    os.write(kMagic, 8);
    write_u64(os, metadata.size());
    for (const auto& [k, v] : metadata) {
        write_string(os, k);
        write_string(os, v);
    }
    write_u64(os, tensors.size());
    for (const auto& [k, m] : tensors) {
        write_string(os, k);
        write_u64(os, static_cast<uint64_t>(m.rows()));
        write_u64(os, static_cast<uint64_t>(m.cols()));
        write_doubles(os, m.raw());
    }
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    Checkpoint ck;
    const uint64_t nmeta = read_u64(is);
    for (uint64_t i = 0; i < nmeta; ++i) {
        std::string k = read_string(is);
        ck.metadata[k] = read_string(is);
    }
    const uint64_t ntensors = read_u64(is);
    for (uint64_t i = 0; i < ntensors; ++i) {
        std::string k = read_string(is);
        const auto rows = static_cast<int>(read_u64(is));
        const auto cols = static_cast<int>(read_u64(is));
        Matrix m(rows, cols);
        for (double& x : m.raw()) {
            const uint64_t bits = read_u64(is);
            std::memcpy(&x, &bits, 8);
        }
        ck.tensors[k] = std::move(m);
    }
    if (!is) throw std::runtime_error("checkpoint: truncated file: " + path);
    return ck;
}

}  // namespace aka
