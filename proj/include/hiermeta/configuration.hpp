#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "lattice.hpp"

namespace hiermeta {

// Set of +1 vertices over N^n sites; the rest are -1.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(u64 vertices) : size_(vertices), words_((vertices + 63) / 64, 0) {}

    static Configuration empty(u64 vertices) { return Configuration(vertices); }
    static Configuration full(u64 vertices) {
        Configuration c(vertices);
        for (u64 v = 0; v < vertices; ++v) c.set(v, true);
        return c;
    }
    static Configuration prefix(u64 vertices, u64 k) {
        Configuration c(vertices);
        for (u64 v = 0; v < k; ++v) c.set(v, true);
        return c;
    }
    static Configuration from_bits(u64 vertices, u64 code) {
        Configuration c(vertices);
        if (!c.words_.empty()) c.words_[0] = vertices >= 64 ? code : (code & ((u64(1) << vertices) - 1));
        c.volume_ = static_cast<u64>(std::popcount(c.words_.empty() ? 0 : c.words_[0]));
        return c;
    }
    template <class Range>
    static Configuration from_vertices(u64 vertices, const Range& plus) {
        Configuration c(vertices);
        for (auto v : plus) c.set(static_cast<u64>(v), true);
        return c;
    }

    u64 size() const { return size_; }
    u64 volume() const { return volume_; }
    bool test(u64 v) const { return (words_[v >> 6] >> (v & 63)) & 1u; }

    void set(u64 v, bool plus) {
        u64& w = words_[v >> 6];
        u64 mask = u64(1) << (v & 63);
        bool cur = w & mask;
        if (cur == plus) return;
        w ^= mask;
        volume_ = plus ? volume_ + 1 : volume_ - 1;
    }
    void flip(u64 v) { set(v, !test(v)); }

    Configuration flipped(u64 v) const {
        Configuration c = *this;
        c.flip(v);
        return c;
    }

    // Only meaningful for at most 64 vertices.
    u64 bits() const { return words_.empty() ? 0 : words_[0]; }

    std::vector<u64> plus_vertices() const {
        std::vector<u64> out;
        for (u64 v = 0; v < size_; ++v)
            if (test(v)) out.push_back(v);
        return out;
    }

    bool operator==(const Configuration& o) const { return size_ == o.size_ && words_ == o.words_; }

    std::size_t hash() const {
        std::size_t h = std::hash<u64>{}(size_);
        for (u64 w : words_) h ^= std::hash<u64>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

private:
    u64 size_ = 0;
    u64 volume_ = 0;
    std::vector<u64> words_;
};

struct ConfigurationHash {
    std::size_t operator()(const Configuration& c) const { return c.hash(); }
};

}  // namespace hiermeta
