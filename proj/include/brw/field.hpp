#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "brw/lattice.hpp"

namespace brw {

// Finite-support counting field, stored as (site, count) entries sorted by
// site with all counts >= 1. Sorted storage gives deterministic lexicographic
// iteration (the normative particle processing order) for free.
template <std::size_t D>
struct ParticleField {
    using Entry = std::pair<Site<D>, std::uint64_t>;
    std::vector<Entry> entries;

    static ParticleField single(const Site<D>& s) {
        ParticleField f;
        f.entries.push_back({s, 1});
        return f;
    }

    bool empty() const { return entries.empty(); }

    std::uint64_t total() const {
        std::uint64_t acc = 0;
        for (const auto& e : entries) acc += e.second;
        return acc;
    }

    std::uint64_t count_at(const Site<D>& s) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), s,
                                   [](const Entry& e, const Site<D>& key) { return e.first < key; });
        return (it != entries.end() && it->first == s) ? it->second : 0;
    }

    bool operator==(const ParticleField& o) const { return entries == o.entries; }

    // Representation invariant: strictly increasing sites, counts >= 1.
    bool well_formed() const {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].second == 0) return false;
            if (i > 0 && !(entries[i - 1].first < entries[i].first)) return false;
        }
        return true;
    }
};

template <std::size_t D>
inline ParticleField<D> field_sum(const ParticleField<D>& a, const ParticleField<D>& b) {
    ParticleField<D> out;
    out.entries.reserve(a.entries.size() + b.entries.size());
    auto ia = a.entries.begin(), ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->first < ib->first)
            out.entries.push_back(*ia++);
        else if (ib->first < ia->first)
            out.entries.push_back(*ib++);
        else {
            out.entries.push_back({ia->first, ia->second + ib->second});
            ++ia;
            ++ib;
        }
    }
    out.entries.insert(out.entries.end(), ia, a.entries.end());
    out.entries.insert(out.entries.end(), ib, b.entries.end());
    return out;
}

// Scratch accumulator for one generation: append raw (site, count) pairs in
// any order, then build() sorts and merges duplicates.
template <std::size_t D>
struct FieldBuilder {
    std::vector<typename ParticleField<D>::Entry> raw;

    void add(const Site<D>& s, std::uint64_t k = 1) { raw.push_back({s, k}); }
    void clear() { raw.clear(); }
    std::size_t size() const { return raw.size(); }

    ParticleField<D> build() {
        std::sort(raw.begin(), raw.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        ParticleField<D> out;
        out.entries.reserve(raw.size());
        for (const auto& e : raw) {
            if (!out.entries.empty() && out.entries.back().first == e.first)
                out.entries.back().second += e.second;
            else
                out.entries.push_back(e);
        }
        raw.clear();
        return out;
    }
};

} // namespace brw
