#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "colex/common.hpp"

namespace colex {

// Fixed-width bitset over the global verse ordering.
class VerseSet {
public:
    VerseSet() = default;
    explicit VerseSet(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

    std::size_t width() const { return width_; }

    void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }
    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    std::size_t intersect_count(const VerseSet& o) const {
        check(o);
        std::size_t n = 0;
        for (std::size_t i = 0; i < words_.size(); ++i) n += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
        return n;
    }

    VerseSet& operator|=(const VerseSet& o) {
        check(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    VerseSet& operator&=(const VerseSet& o) {
        check(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    // this \ o
    VerseSet& subtract(const VerseSet& o) {
        check(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }

    friend VerseSet operator|(VerseSet a, const VerseSet& b) { return a |= b; }
    friend VerseSet operator&(VerseSet a, const VerseSet& b) { return a &= b; }

    bool subset_of(const VerseSet& o) const {
        check(o);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w) {
                fn(wi * 64 + static_cast<std::size_t>(std::countr_zero(w)));
                w &= w - 1;
            }
        }
    }

    std::vector<std::size_t> ordinals() const {
        std::vector<std::size_t> out;
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    bool operator==(const VerseSet&) const = default;

private:
    void check(const VerseSet& o) const {
        if (o.width_ != width_) throw Error("VerseSet width mismatch");
    }

    std::size_t width_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace colex
