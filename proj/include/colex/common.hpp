#pragma once
// Shared plumbing: error types, language ids, UTF-8 helpers, seeding, and
// a small worker pool used by the stage drivers.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace colex {

// Any failure inside the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input, bad configuration, or a missing upstream artifact (exit code 1).
class ValidationError : public Error {
public:
    using Error::Error;
};

inline void log_warn(std::string_view msg) { std::cerr << "[colex] warning: " << msg << '\n'; }
inline void log_info(std::string_view msg) { std::cerr << "[colex] " << msg << '\n'; }

// ISO 639-3 style code. Digits are accepted after the first letter so that
// synthetic languages (xx1, xx2) can sit next to real ones.
class LanguageId {
public:
    LanguageId() = default;
    explicit LanguageId(std::string code) : code_(std::move(code)) {
        if (!valid(code_)) throw ValidationError("invalid language id '" + code_ + "'");
    }

    static bool valid(std::string_view s) {
        if (s.size() != 3 || s[0] < 'a' || s[0] > 'z') return false;
        return std::all_of(s.begin(), s.end(),
                           [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); });
    }

    const std::string& str() const { return code_; }
    auto operator<=>(const LanguageId&) const = default;

private:
    std::string code_;
};

constexpr char kBoundary = '$';

// ---------------------------------------------------------------- UTF-8

inline std::size_t utf8_len(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;  // stray continuation byte, treated as its own unit
}

// Byte offsets of every code point start, plus s.size() as sentinel.
inline std::vector<std::size_t> utf8_offsets(std::string_view s) {
    std::vector<std::size_t> out;
    out.reserve(s.size() + 1);
    std::size_t i = 0;
    while (i < s.size()) {
        out.push_back(i);
        i += std::min(utf8_len(static_cast<unsigned char>(s[i])), s.size() - i);
    }
    out.push_back(s.size());
    return out;
}

inline std::size_t utf8_count(std::string_view s) { return utf8_offsets(s).size() - 1; }

inline char32_t utf8_decode(std::string_view s) {
    auto b = [&](std::size_t i) { return static_cast<char32_t>(static_cast<unsigned char>(s[i])); };
    switch (s.size()) {
        case 1: return b(0);
        case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
        case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
        case 4: return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) | (b(3) & 0x3F);
        default: return 0xFFFD;
    }
}

inline void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Simple case folding for Latin, Greek and Cyrillic; other scripts pass through.
inline char32_t fold_case(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 0x20;
    if ((c >= 0xC0 && c <= 0xDE && c != 0xD7)) return c + 0x20;
    if (c == 0x178) return 0xFF;
    if (c >= 0x100 && c <= 0x17F && c != 0x130 && c != 0x131 && c != 0x138 && c != 0x149 && c != 0x17F) {
        // Latin Extended-A alternates upper/lower, with a parity shift in 0x139..0x148 and 0x179..0x17E
        bool shifted = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
        bool upper = shifted ? (c % 2 == 1) : (c % 2 == 0);
        return upper ? c + 1 : c;
    }
    if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20;
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    return c;
}

inline bool is_punct(char32_t c) {
    if (c < 0x80) return c != '$' && std::ispunct(static_cast<int>(c)) != 0;
    return c == 0xA1 || c == 0xAB || c == 0xB7 || c == 0xBB || c == 0xBF ||
           (c >= 0x2010 && c <= 0x205E) ||              // general punctuation
           (c >= 0x3000 && c <= 0x3003) ||              // ideographic space, comma, full stop
           (c >= 0x3008 && c <= 0x3011) ||              // CJK brackets
           (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) || c == 0xFF1F;
}

// Lowercase, drop boundary-marker characters, strip punctuation at the edges.
inline std::string normalize_token(std::string_view raw) {
    auto off = utf8_offsets(raw);
    std::vector<char32_t> cps;
    cps.reserve(off.size());
    for (std::size_t i = 0; i + 1 < off.size(); ++i) {
        char32_t c = utf8_decode(raw.substr(off[i], off[i + 1] - off[i]));
        if (c == static_cast<char32_t>(kBoundary)) continue;
        cps.push_back(fold_case(c));
    }
    std::size_t lo = 0, hi = cps.size();
    while (lo < hi && is_punct(cps[lo])) ++lo;
    while (hi > lo && is_punct(cps[hi - 1])) --hi;
    std::string out;
    for (std::size_t i = lo; i < hi; ++i) utf8_append(out, cps[i]);
    return out;
}

inline std::string mark_token(std::string_view inner) {
    std::string s;
    s.reserve(inner.size() + 2);
    s += kBoundary;
    s += inner;
    s += kBoundary;
    return s;
}

inline std::string_view unmark_token(std::string_view marked) {
    if (marked.size() >= 2 && marked.front() == kBoundary && marked.back() == kBoundary)
        return marked.substr(1, marked.size() - 2);
    return marked;
}

// ---------------------------------------------------------------- strings

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (i < s.size()) {
        while (i < s.size() && ws(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !ws(s[j])) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    // avoid "-0.000000" so identical values always print identically
    if (std::string_view(buf) == "-0.000000") return "0.000000";
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------- randomness

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

// Uniform in [0,1) from the top 53 bits; portable across standard libraries.
template <class Rng>
double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

// Fisher-Yates with uniform_index, so the permutation only depends on the engine.
template <class T, class Rng>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

// ---------------------------------------------------------------- workers

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions from any
// task are rethrown on the calling thread (first one wins).
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) first = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace colex
