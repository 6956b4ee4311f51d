#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace pstest {

using Symbol = std::string;

// Success marker emitted by observers. Reserved: never part of a declared
// alphabet and never stored inside a membrane.
inline const Symbol omega_symbol = "omega";

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite multiset of object symbols. Entries always carry positive counts;
// iteration order is lexicographic in the symbol, which every canonical
// serialization in the workbench relies on.
class Multiset {
  public:
    using Map = std::map<Symbol, std::uint32_t>;
    using const_iterator = Map::const_iterator;

    Multiset() = default;
    Multiset(std::initializer_list<std::pair<const Symbol, std::uint32_t>> init) {
        for (const auto& [sym, n] : init)
            add(sym, n);
    }

    static Multiset single(const Symbol& sym, std::uint32_t n = 1) {
        Multiset m;
        m.add(sym, n);
        return m;
    }

    void add(const Symbol& sym, std::uint32_t n = 1) {
        if (n == 0)
            return;
        entries_[sym] += n;
    }

    Multiset& add_scaled(const Multiset& other, std::uint32_t factor) {
        if (factor == 0)
            return *this;
        for (const auto& [sym, n] : other.entries_)
            entries_[sym] += n * factor;
        return *this;
    }

    std::uint32_t count(const Symbol& sym) const {
        auto it = entries_.find(sym);
        return it == entries_.end() ? 0 : it->second;
    }

    // Counting inclusion: other[s] <= this[s] for every symbol.
    bool contains(const Multiset& other) const {
        for (const auto& [sym, n] : other.entries_)
            if (count(sym) < n)
                return false;
        return true;
    }

    bool has(const Symbol& sym) const { return entries_.count(sym) != 0; }

    Multiset& operator+=(const Multiset& other) { return add_scaled(other, 1); }

    friend Multiset operator+(Multiset lhs, const Multiset& rhs) {
        lhs += rhs;
        return lhs;
    }

    // Counting difference; throws if other is not contained in this.
    void subtract(const Multiset& other) {
        for (const auto& [sym, n] : other.entries_) {
            auto it = entries_.find(sym);
            if (it == entries_.end() || it->second < n)
                throw Error("multiset subtraction underflow on '" + sym + "'");
            it->second -= n;
            if (it->second == 0)
                entries_.erase(it);
        }
    }

    friend Multiset operator-(Multiset lhs, const Multiset& rhs) {
        lhs.subtract(rhs);
        return lhs;
    }

    std::set<Symbol> support() const {
        std::set<Symbol> s;
        for (const auto& [sym, n] : entries_)
            s.insert(sym);
        return s;
    }

    bool empty() const { return entries_.empty(); }

    std::uint32_t total() const {
        std::uint32_t t = 0;
        for (const auto& [sym, n] : entries_)
            t += n;
        return t;
    }

    std::size_t distinct() const { return entries_.size(); }

    const_iterator begin() const { return entries_.begin(); }
    const_iterator end() const { return entries_.end(); }

    friend bool operator==(const Multiset& a, const Multiset& b) { return a.entries_ == b.entries_; }
    friend bool operator<(const Multiset& a, const Multiset& b) { return a.entries_ < b.entries_; }

    // "{a:2,b}", "{}" for the empty multiset. Used for edge labels and keys.
    std::string str() const {
        std::string out = "{";
        bool first = true;
        for (const auto& [sym, n] : entries_) {
            if (!first)
                out += ',';
            first = false;
            out += sym;
            if (n > 1) {
                out += ':';
                out += std::to_string(n);
            }
        }
        out += '}';
        return out;
    }

  private:
    Map entries_;
};

} // namespace pstest
