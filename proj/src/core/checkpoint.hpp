#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "matrix.hpp"

namespace aka {

// Self-describing binary container: string-keyed float64 tensors plus a
// string metadata map. Round-trips bit-exactly.
struct Checkpoint {
    std::map<std::string, std::string> metadata;
    std::map<std::string, Matrix> tensors;

    void set_meta_int(const std::string& key, int64_t v) { metadata[key] = std::to_string(v); }
    int64_t meta_int(const std::string& key) const;
    const Matrix& tensor(const std::string& key) const;
    bool has_tensor(const std::string& key) const { return tensors.count(key) > 0; }

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);
};

}  // namespace aka
