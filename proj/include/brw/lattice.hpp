#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace brw {

template <std::size_t D>
using Site = std::array<std::int32_t, D>;

using Site2 = Site<2>;

template <std::size_t D>
inline std::string site_str(const Site<D>& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < D; ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

// Componentwise partial order x ⪯ y.
template <std::size_t D>
inline bool leq_partial(const Site<D>& x, const Site<D>& y) {
    for (std::size_t i = 0; i < D; ++i)
        if (x[i] > y[i]) return false;
    return true;
}

template <std::size_t D>
inline int coord_sum(const Site<D>& s) {
    int acc = 0;
    for (std::size_t i = 0; i < D; ++i) acc += s[i];
    return acc;
}

// Parity of a site (sum of coordinates mod 2); the strict kernel conserves
// parity(site) + t mod 2.
template <std::size_t D>
inline int parity(const Site<D>& s) {
    return coord_sum(s) & 1;
}

template <std::size_t D>
inline int linf_norm(const Site<D>& s) {
    int m = 0;
    for (std::size_t i = 0; i < D; ++i) m = std::max(m, std::abs(s[i]));
    return m;
}

// Box Λ_n = {x : ‖x‖_∞ ≤ n}.
template <std::size_t D>
struct BoxGeometry {
    int n;

    explicit BoxGeometry(int n_) : n(n_) {
        if (n < 1) throw std::invalid_argument("box radius must be >= 1");
    }

    bool contains(const Site<D>& s) const { return linf_norm(s) <= n; }
    bool boundary_contains(const Site<D>& s) const { return linf_norm(s) == n; }
    bool interior_contains(const Site<D>& s) const { return linf_norm(s) < n; }

    std::size_t side_length() const { return 2 * static_cast<std::size_t>(n) + 1; }
    std::size_t site_count() const {
        std::size_t c = 1;
        for (std::size_t i = 0; i < D; ++i) c *= side_length();
        return c;
    }
    // Dense row-major index with the last coordinate fastest; iteration in
    // index order is lexicographic site order.
    std::size_t index_of(const Site<D>& s) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < D; ++i) idx = idx * side_length() + static_cast<std::size_t>(s[i] + n);
        return idx;
    }
    Site<D> site_at(std::size_t idx) const {
        Site<D> s{};
        for (std::size_t i = D; i-- > 0;) {
            s[i] = static_cast<std::int32_t>(idx % side_length()) - n;
            idx /= side_length();
        }
        return s;
    }
};

// Compass sides of ∂Λ_n in d=2; corners belong to both adjacent sides.
struct BoundarySides {
    bool north = false, south = false, east = false, west = false;
    bool any() const { return north || south || east || west; }
};

inline BoundarySides boundary_side(const BoxGeometry<2>& box, const Site2& s) {
    BoundarySides out;
    if (!box.contains(s)) return out;
    out.east = s[0] == box.n;
    out.west = s[0] == -box.n;
    out.north = s[1] == box.n;
    out.south = s[1] == -box.n;
    return out;
}

// Reflection across the vertical axis x = 1/2 (swaps x ≤ 0 and x ≥ 1).
inline Site2 reflect_phi(const Site2& s) { return {1 - s[0], s[1]}; }
// Reflection across the vertical line x = 1 (swaps x ≤ 0 and x ≥ 2).
inline Site2 reflect_psi(const Site2& s) { return {2 - s[0], s[1]}; }
// Reflection across the antidiagonal x + y = 1 (swaps x+y ≤ 0 and x+y ≥ 2).
inline Site2 reflect_upsilon(const Site2& s) { return {1 - s[1], 1 - s[0]}; }

// Punctured box: square of side 2n−1 centred at (1/2,1/2) — sites with both
// coordinates in [1−n, n] — minus its four corners. Its W/S boundary edges sit
// strictly inside Λ_n while υ maps them onto the N/E edges, which lie on ∂Λ_n.
struct PuncturedBox {
    int n;

    explicit PuncturedBox(int n_) : n(n_) {
        if (n < 2) throw std::invalid_argument("punctured box needs n >= 2");
    }

    bool in_square(const Site2& s) const {
        return s[0] >= 1 - n && s[0] <= n && s[1] >= 1 - n && s[1] <= n;
    }
    bool is_corner(const Site2& s) const {
        return (s[0] == 1 - n || s[0] == n) && (s[1] == 1 - n || s[1] == n);
    }
    bool contains(const Site2& s) const { return in_square(s) && !is_corner(s); }
    bool boundary_contains(const Site2& s) const {
        return contains(s) && (s[0] == 1 - n || s[0] == n || s[1] == 1 - n || s[1] == n);
    }
    bool interior_contains(const Site2& s) const { return contains(s) && !boundary_contains(s); }

    BoundarySides side(const Site2& s) const {
        BoundarySides out;
        if (!contains(s)) return out;
        out.east = s[0] == n;
        out.west = s[0] == 1 - n;
        out.north = s[1] == n;
        out.south = s[1] == 1 - n;
        return out;
    }

    // Antidiagonal index: site lies on D̃_k iff x + y = k, k ∈ [2−2n, 2n].
    static int diagonal_of(const Site2& s) { return s[0] + s[1]; }
};

inline BoundarySides boundary_side(const PuncturedBox& box, const Site2& s) { return box.side(s); }

enum class KernelKind { Lazy, Strict, Generalized };

// Offspring placement sites in normative order: self first (lazy only), then
// +e1, −e1, +e2, −e2, …  This order is shared by the sampler and the oracle.
template <std::size_t D>
inline std::vector<Site<D>> neighbors(const Site<D>& x, KernelKind kind) {
    std::vector<Site<D>> out;
    out.reserve(kind == KernelKind::Lazy ? 2 * D + 1 : 2 * D);
    if (kind == KernelKind::Lazy) out.push_back(x);
    for (std::size_t i = 0; i < D; ++i) {
        Site<D> p = x;
        p[i] += 1;
        out.push_back(p);
        p[i] -= 2;
        out.push_back(p);
    }
    return out;
}

} // namespace brw
