#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "forge/errors.hpp"
#include "forge/group.hpp"
#include "forge/subshift.hpp"

namespace forge {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<std::int64_t>;

/// Parse "0.41", "41/100" or "2".
inline Rational parse_rational(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos)
            return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(std::stoll(text));
        std::string whole = text.substr(0, dot), frac = text.substr(dot + 1);
        if (frac.size() > 15) throw SpecError("too many decimal digits in '" + text + "'");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        bool neg = !whole.empty() && whole[0] == '-';
        std::int64_t w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
        std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
        std::int64_t num = (w < 0 ? -w : w) * den + f;
        return Rational(neg ? -num : num, den);
    } catch (const std::invalid_argument&) {
        throw SpecError("not a rational number: '" + text + "'");
    } catch (const std::out_of_range&) {
        throw SpecError("rational out of range: '" + text + "'");
    }
}

struct EpsilonBound {
    std::int64_t cover_size = 2;
    double approx = 0;  // sqrt(1 + log 2 / log n) - 1

    /// 2e + e^2 < log 2 / log n, decided exactly: n^{2pq + p^2} < 2^{q^2}.
    bool admits(const Rational& eps) const {
        if (eps <= 0) return false;
        auto p = static_cast<unsigned>(eps.numerator());
        auto q = static_cast<unsigned>(eps.denominator());
        BigInt lhs = boost::multiprecision::pow(BigInt(cover_size), 2 * p * q + p * p);
        BigInt rhs = boost::multiprecision::pow(BigInt(2), q * q);
        return lhs < rhs;
    }
};

inline EpsilonBound epsilon_bound(std::int64_t cover_size) {
    if (cover_size < 2) throw DomainError("cover alphabet needs at least two symbols");
    double r = std::log(2.0) / std::log(static_cast<double>(cover_size));
    return {cover_size, std::sqrt(1.0 + r) - 1.0};
}

struct FolnerSet {
    std::int64_t n = 0;  // half-width of the box
    std::vector<Element> T;
    std::vector<Element> boundary;
};

inline std::vector<Element> lattice_box(int dim, std::int64_t n) {
    std::vector<Element> out;
    Element e(static_cast<std::size_t>(dim), -n);
    while (true) {
        out.push_back(e);
        std::size_t i = 0;
        while (i < e.size() && e[i] == n) e[i++] = -n;
        if (i == e.size()) break;
        ++e[i];
    }
    return out;
}

/// Smallest box {-n..n}^d with |dT| <= eps |T|.
inline FolnerSet folner_interval(const Group& L, const Rational& eps, std::size_t budget = global_budget()) {
    if (L.kind() != GroupKind::lattice) throw DomainError("Folner boxes are implemented for lattices");
    if (eps <= 0) throw DomainError("epsilon must be positive");
    for (std::int64_t n = 0;; ++n) {
        auto T = lattice_box(L.dim(), n);
        if (T.size() > budget) throw BudgetError("Folner box exceeds budget");
        auto dT = L.boundary(T);
        if (Rational(static_cast<std::int64_t>(dT.size())) <= eps * static_cast<std::int64_t>(T.size()))
            return {n, std::move(T), std::move(dT)};
    }
}

struct Certificate {
    std::int64_t cover_size = 0;
    std::int64_t T = 0, U = 0, dT = 0, dU = 0;
    std::int64_t dTU = 0;
    BigInt lhs, rhs;  // 2^{|T||U|} and |B|^{|d(TxU)|}
    bool valid = false;
};

inline Certificate pigeonhole_certificate(std::int64_t cover_size, std::int64_t T, std::int64_t dT, std::int64_t U,
                                          std::int64_t dU) {
    if (cover_size < 1) throw DomainError("cover alphabet must be nonempty");
    Certificate c;
    c.cover_size = cover_size;
    c.T = T;
    c.U = U;
    c.dT = dT;
    c.dU = dU;
    c.dTU = dT * U + dU * T + dT * dU;
    c.lhs = boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(T * U));
    c.rhs = boost::multiprecision::pow(BigInt(cover_size), static_cast<unsigned>(c.dTU));
    c.valid = c.lhs > c.rhs;
    return c;
}

inline Certificate pigeonhole_certificate(std::int64_t cover_size, const Group& H, const std::vector<Element>& T,
                                          const Group& K, const std::vector<Element>& U) {
    return pigeonhole_certificate(cover_size, static_cast<std::int64_t>(T.size()),
                                  static_cast<std::int64_t>(H.boundary(T).size()), static_cast<std::int64_t>(U.size()),
                                  static_cast<std::int64_t>(K.boundary(U).size()));
}

/// |(T x U)(S_H x S_K) \ (T x U)| counted directly.
inline std::int64_t product_boundary_size(const Group& H, const std::vector<Element>& T, const Group& K,
                                          const std::vector<Element>& U) {
    std::set<std::pair<Element, Element>> inside, out;
    for (const auto& t : T)
        for (const auto& u : U) inside.emplace(t, u);
    for (const auto& t : T)
        for (const auto& u : U)
            for (int s = 0; s < H.num_generators(); ++s)
                for (int k = 0; k < K.num_generators(); ++k) {
                    std::pair<Element, Element> x{H.mul(t, H.generator(s)), K.mul(u, K.generator(k))};
                    if (!inside.count(x)) out.insert(std::move(x));
                }
    return static_cast<std::int64_t>(out.size());
}

// ---------------------------------------------------------------------------
// Mirror witnesses on Z x Z. Symbols: 0 is *, 1 is "0", 2 is "1".

/// p[t][u] for t in {-tw..tw}, u in {-uw..uw}, entries 0 or 1.
using BoxPattern = std::vector<std::vector<int>>;

namespace detail {

inline std::pair<std::int64_t, std::int64_t> pattern_half_widths(const BoxPattern& p) {
    if (p.empty() || p.size() % 2 == 0) throw SpecError("pattern needs an odd number of rows");
    for (const auto& row : p) {
        if (row.size() != p[0].size() || row.size() % 2 == 0) throw SpecError("pattern rows must share an odd length");
        for (int v : row)
            if (v != 0 && v != 1) throw SpecError("pattern entries must be 0 or 1");
    }
    return {static_cast<std::int64_t>(p.size() / 2), static_cast<std::int64_t>(p[0].size() / 2)};
}

inline ConfigPatch window_patch(std::int64_t window) {
    ConfigPatch out;
    out.radius = 2 * window;
    for (std::int64_t h = -window; h <= window; ++h)
        for (std::int64_t k = -window; k <= window; ++k) out.cells[Group::pack({h}, {k})] = 1;
    return out;
}

}  // namespace detail

inline Group mirror_group() { return Group::product(Group::lattice(1), Group::lattice(1)); }

/// Smallest g >= 1 with gT and T^-1 g^-1 disjoint for T = {-tw..tw}.
inline std::int64_t reflection_offset(std::int64_t tw) { return tw + 1; }

inline ConfigPatch reflection_witness(const BoxPattern& p, std::int64_t window) {
    auto [tw, uw] = detail::pattern_half_widths(p);
    auto g = reflection_offset(tw);
    if (g + tw > window || uw > window) throw BoundaryError("window too small for the reflection witness");
    auto out = detail::window_patch(window);
    for (std::int64_t k = -window; k <= window; ++k) out.cells[Group::pack({0}, {k})] = 0;
    for (std::int64_t t = -tw; t <= tw; ++t)
        for (std::int64_t u = -uw; u <= uw; ++u) {
            int v = p[static_cast<std::size_t>(t + tw)][static_cast<std::size_t>(u + uw)] + 1;
            out.cells[Group::pack({g + t}, {u})] = v;
            out.cells[Group::pack({-(g + t)}, {u})] = v;
        }
    return out;
}

inline ConfigPatch ball_mimic_witness(const BoxPattern& p, std::int64_t window, const BallCenters& centers) {
    auto [tw, uw] = detail::pattern_half_widths(p);
    auto n = static_cast<std::size_t>(tw);
    if (centers.a.size() <= n) throw SpecError("not enough ball centers");
    auto a = centers.a[n][0], b = centers.b[n][0];
    auto reach = std::max(std::abs(a), std::abs(b)) + tw;
    if (reach > window || uw > window) throw BoundaryError("window too small for the ball-mimic witness");
    auto out = detail::window_patch(window);
    for (std::int64_t k = -window; k <= window; ++k) out.cells[Group::pack({0}, {k})] = 0;
    for (std::int64_t t = -tw; t <= tw; ++t)
        for (std::int64_t u = -uw; u <= uw; ++u) {
            int v = p[static_cast<std::size_t>(t + tw)][static_cast<std::size_t>(u + uw)] + 1;
            out.cells[Group::pack({a + t}, {u})] = v;
            out.cells[Group::pack({b + t}, {u})] = v;
        }
    return out;
}

}  // namespace forge
