#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forge/errors.hpp"

namespace forge {

// Normal forms. Lattice: coordinates. Free: reduced word with letters +-(i+1).
// Product: [size of left part, left..., right...].
using Element = std::vector<std::int64_t>;

// A word is a list of generator indices. Index 0 is always the identity;
// letter i has index 2i+1 and its inverse 2i+2.
using Word = std::vector<int>;

struct ElementHash {
    std::size_t operator()(const Element& e) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ULL ^ e.size();
        for (auto v : e) h ^= std::hash<std::int64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

enum class GroupKind { lattice, free, product };

inline std::string letter_name(int i) {
    if (i < 26) return std::string(1, static_cast<char>('a' + i));
    return "g" + std::to_string(i);
}

class Group {
public:
    static Group lattice(int dim) {
        if (dim < 1) throw SpecError("lattice dimension must be positive");
        Group g;
        g.kind_ = GroupKind::lattice;
        g.param_ = dim;
        g.letters_ = dim;
        g.finish();
        return g;
    }

    static Group free(int rank) {
        if (rank < 1) throw SpecError("free group rank must be positive");
        Group g;
        g.kind_ = GroupKind::free;
        g.param_ = rank;
        g.letters_ = rank;
        g.finish();
        return g;
    }

    static Group product(const Group& left, const Group& right) {
        Group g;
        g.kind_ = GroupKind::product;
        g.left_ = std::make_shared<Group>(left);
        g.right_ = std::make_shared<Group>(right);
        g.letters_ = left.letters_ + right.letters_;
        g.finish();
        return g;
    }

    GroupKind kind() const { return kind_; }
    int dim() const { return param_; }
    int rank() const { return param_; }
    const Group& left() const { return *left_; }
    const Group& right() const { return *right_; }
    int letters() const { return letters_; }
    int num_generators() const { return 2 * letters_ + 1; }

    const std::string& generator_name(int s) const { return names_.at(static_cast<std::size_t>(s)); }
    const Element& generator(int s) const { return gens_.at(static_cast<std::size_t>(s)); }

    int generator_index(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return static_cast<int>(i);
        throw SpecError("unknown generator symbol '" + std::string(name) + "'");
    }

    static int inverse_generator(int s) {
        if (s == 0) return 0;
        return (s % 2 == 1) ? s + 1 : s - 1;
    }

    // Generator index whose element equals e, or -1.
    int generator_of(const Element& e) const {
        for (std::size_t i = 0; i < gens_.size(); ++i)
            if (gens_[i] == e) return static_cast<int>(i);
        return -1;
    }

    Element identity() const {
        switch (kind_) {
            case GroupKind::lattice: return Element(static_cast<std::size_t>(param_), 0);
            case GroupKind::free: return {};
            case GroupKind::product: {
                auto l = left_->identity();
                auto r = right_->identity();
                return pack(l, r);
            }
        }
        return {};
    }

    Element mul(const Element& a, const Element& b) const {
        switch (kind_) {
            case GroupKind::lattice: {
                Element c(a.size());
                for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
                return c;
            }
            case GroupKind::free: {
                Element c = a;
                for (auto x : b) {
                    if (!c.empty() && c.back() == -x)
                        c.pop_back();
                    else
                        c.push_back(x);
                }
                return c;
            }
            case GroupKind::product: {
                auto [al, ar] = unpack(a);
                auto [bl, br] = unpack(b);
                return pack(left_->mul(al, bl), right_->mul(ar, br));
            }
        }
        return {};
    }

    Element inv(const Element& a) const {
        switch (kind_) {
            case GroupKind::lattice: {
                Element c(a.size());
                for (std::size_t i = 0; i < a.size(); ++i) c[i] = -a[i];
                return c;
            }
            case GroupKind::free: {
                Element c(a.rbegin(), a.rend());
                for (auto& x : c) x = -x;
                return c;
            }
            case GroupKind::product: {
                auto [l, r] = unpack(a);
                return pack(left_->inv(l), right_->inv(r));
            }
        }
        return {};
    }

    Element eval(const Word& w) const {
        Element e = identity();
        for (int s : w) {
            if (s < 0 || s >= num_generators()) throw SpecError("generator index out of range");
            e = mul(e, gens_[static_cast<std::size_t>(s)]);
        }
        return e;
    }

    bool is_identity(const Word& w) const { return eval(w) == identity(); }

    // Word length with respect to the symmetric generating set.
    std::int64_t length(const Element& e) const {
        switch (kind_) {
            case GroupKind::lattice: {
                std::int64_t n = 0;
                for (auto v : e) n += v < 0 ? -v : v;
                return n;
            }
            case GroupKind::free: return static_cast<std::int64_t>(e.size());
            case GroupKind::product: {
                auto [l, r] = unpack(e);
                return left_->length(l) + right_->length(r);
            }
        }
        return 0;
    }

    // Shortlex-least geodesic word for e: greedily take the smallest letter
    // that starts some geodesic.
    Word normal_word(const Element& e) const {
        Word w;
        Element rest = e;
        auto len = length(rest);
        while (len > 0) {
            bool advanced = false;
            for (int s = 1; s < num_generators(); ++s) {
                Element next = mul(gens_[static_cast<std::size_t>(inverse_generator(s))], rest);
                auto nl = length(next);
                if (nl == len - 1) {
                    w.push_back(s);
                    rest = std::move(next);
                    len = nl;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) throw BudgetError("geodesic search made no progress");
        }
        return w;
    }

    Word geodesic(const Word& w) const { return normal_word(eval(w)); }

    // Shortlex order on elements via their least geodesic words.
    bool shortlex_less(const Element& a, const Element& b) const {
        auto la = length(a), lb = length(b);
        if (la != lb) return la < lb;
        return normal_word(a) < normal_word(b);
    }

    void sort_shortlex(std::vector<Element>& v) const {
        std::vector<std::pair<Word, std::size_t>> keys;
        keys.reserve(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) keys.emplace_back(normal_word(v[i]), i);
        std::sort(keys.begin(), keys.end(), [](const auto& x, const auto& y) {
            if (x.first.size() != y.first.size()) return x.first.size() < y.first.size();
            return x.first < y.first;
        });
        std::vector<Element> out;
        out.reserve(v.size());
        for (auto& k : keys) out.push_back(std::move(v[k.second]));
        v = std::move(out);
    }

    /// Elements at distance <= r from the identity, in shortlex order.
    std::vector<Element> ball(std::int64_t r, std::size_t budget = global_budget()) const {
        if (r < 0) throw SpecError("negative radius");
        std::vector<Element> out{identity()};
        std::unordered_map<Element, bool, ElementHash> seen{{identity(), true}};
        std::size_t layer_begin = 0;
        for (std::int64_t k = 0; k < r; ++k) {
            std::size_t layer_end = out.size();
            for (std::size_t i = layer_begin; i < layer_end; ++i) {
                for (int s = 1; s < num_generators(); ++s) {
                    Element e = mul(out[i], gens_[static_cast<std::size_t>(s)]);
                    if (seen.emplace(e, true).second) {
                        out.push_back(std::move(e));
                        if (out.size() > budget)
                            throw BudgetError("ball of radius " + std::to_string(r) + " exceeds budget");
                    }
                }
            }
            layer_begin = layer_end;
        }
        return out;
    }

    /// TS \ T, in shortlex order.
    std::vector<Element> boundary(const std::vector<Element>& T) const {
        std::set<Element> inside(T.begin(), T.end());
        std::set<Element> result;
        for (const auto& t : T)
            for (const auto& s : gens_) {
                Element e = mul(t, s);
                if (!inside.count(e)) result.insert(std::move(e));
            }
        std::vector<Element> out(result.begin(), result.end());
        sort_shortlex(out);
        return out;
    }

    // Coordinates of h in the orbit of right multiplication by letter `gen`:
    // h = rep * gen^k with rep canonical.
    std::pair<Element, std::int64_t> cyclic_coordinates(const Element& h, int gen) const {
        if (gen <= 0 || gen >= num_generators()) throw SpecError("bad generator for cyclic coordinates");
        int letter = (gen - 1) / 2;
        std::int64_t sign = (gen % 2 == 1) ? 1 : -1;
        switch (kind_) {
            case GroupKind::lattice: {
                Element rep = h;
                auto k = rep[static_cast<std::size_t>(letter)];
                rep[static_cast<std::size_t>(letter)] = 0;
                return {rep, sign * k};
            }
            case GroupKind::free: {
                Element rep = h;
                std::int64_t k = 0;
                while (!rep.empty() && (rep.back() == letter + 1 || rep.back() == -(letter + 1))) {
                    k += rep.back() > 0 ? 1 : -1;
                    rep.pop_back();
                }
                return {rep, sign * k};
            }
            case GroupKind::product: {
                auto [l, r] = unpack(h);
                if (letter < left_->letters_) {
                    auto [rep, k] = left_->cyclic_coordinates(l, gen);
                    return {pack(rep, r), k};
                }
                int sub = gen - 2 * left_->letters_;
                auto [rep, k] = right_->cyclic_coordinates(r, sub);
                return {pack(l, rep), k};
            }
        }
        return {h, 0};
    }

    Word parse_word(std::string_view text) const {
        Word w;
        std::istringstream in{std::string(text)};
        std::string tok;
        while (in >> tok) w.push_back(generator_index(tok));
        return w;
    }

    template <class Range>
    Word word_from_names(const Range& names) const {
        Word w;
        for (const auto& n : names) w.push_back(generator_index(n));
        return w;
    }

    std::string format_word(const Word& w) const {
        std::string s;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i) s += ' ';
            s += generator_name(w[i]);
        }
        return s;
    }

    std::string format_element(const Element& e) const {
        auto w = normal_word(e);
        return w.empty() ? std::string("1") : format_word(w);
    }

    std::pair<Element, Element> unpack(const Element& e) const {
        auto n = static_cast<std::size_t>(e.at(0));
        Element l(e.begin() + 1, e.begin() + 1 + static_cast<std::ptrdiff_t>(n));
        Element r(e.begin() + 1 + static_cast<std::ptrdiff_t>(n), e.end());
        return {std::move(l), std::move(r)};
    }

    static Element pack(const Element& l, const Element& r) {
        Element e;
        e.reserve(l.size() + r.size() + 1);
        e.push_back(static_cast<std::int64_t>(l.size()));
        e.insert(e.end(), l.begin(), l.end());
        e.insert(e.end(), r.begin(), r.end());
        return e;
    }

    bool operator==(const Group& o) const {
        if (kind_ != o.kind_) return false;
        if (kind_ == GroupKind::product) return *left_ == *o.left_ && *right_ == *o.right_;
        return param_ == o.param_;
    }

private:
    Group() = default;

    void finish() {
        names_.assign(1, "1");
        gens_.assign(1, identity());
        for (int i = 0; i < letters_; ++i) {
            names_.push_back(letter_name(i));
            names_.push_back(letter_name(i) + "-");
            Element g = letter_element(i);
            gens_.push_back(g);
            gens_.push_back(inv(g));
        }
    }

    Element letter_element(int i) const {
        switch (kind_) {
            case GroupKind::lattice: {
                Element e(static_cast<std::size_t>(param_), 0);
                e[static_cast<std::size_t>(i)] = 1;
                return e;
            }
            case GroupKind::free: return Element{i + 1};
            case GroupKind::product:
                if (i < left_->letters_) return pack(left_->letter_element(i), right_->identity());
                return pack(left_->identity(), right_->letter_element(i - left_->letters_));
        }
        return {};
    }

    GroupKind kind_ = GroupKind::lattice;
    int param_ = 0;
    int letters_ = 0;
    std::shared_ptr<Group> left_, right_;
    std::vector<std::string> names_;
    std::vector<Element> gens_;
};

/// T(h) = h * s for a fixed infinite-order generator s.
class TranslationLikeAction {
public:
    explicit TranslationLikeAction(const Group& g, int generator = 1) : group_(&g), gen_(generator) {
        if (generator <= 0 || generator >= g.num_generators())
            throw SpecError("translation-like action needs a non-identity generator");
    }
    Element operator()(const Element& h) const { return group_->mul(h, group_->generator(gen_)); }
    Element inverse(const Element& h) const {
        return group_->mul(h, group_->generator(Group::inverse_generator(gen_)));
    }
    int right_generator() const { return gen_; }
    int left_generator() const { return Group::inverse_generator(gen_); }
    const Group& group() const { return *group_; }

private:
    const Group* group_;
    int gen_;
};

// Index lookup for a finite list of elements.
class ElementIndex {
public:
    ElementIndex() = default;
    explicit ElementIndex(std::vector<Element> elems) : elems_(std::move(elems)) {
        for (std::size_t i = 0; i < elems_.size(); ++i) pos_.emplace(elems_[i], i);
    }
    std::ptrdiff_t find(const Element& e) const {
        auto it = pos_.find(e);
        return it == pos_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
    }
    bool contains(const Element& e) const { return pos_.count(e) > 0; }
    const Element& operator[](std::size_t i) const { return elems_[i]; }
    std::size_t size() const { return elems_.size(); }
    const std::vector<Element>& elements() const { return elems_; }

private:
    std::vector<Element> elems_;
    std::unordered_map<Element, std::size_t, ElementHash> pos_;
};

}  // namespace forge
