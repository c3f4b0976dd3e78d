#include "binnet/bitpack.hpp"

#include <bit>
#include <cmath>

namespace binnet {

namespace {

// All-ones over the live bits of the last word of an n-bit vector.
std::uint64_t tail_mask(std::size_t n) {
    const std::size_t r = n & 63;
    return r == 0 ? ~std::uint64_t(0) : (std::uint64_t(1) << r) - 1;
}

} // namespace

int binarize_scalar(double x) {
    if (!std::isfinite(x))
        throw InvalidArgumentError("binarize_scalar: non-finite input");
    return x >= 0.0 ? +1 : -1;
}

BitVector pack(std::span<const int> values) {
    BitVector v = BitVector::zeros(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == +1)
            v.words[i >> 6] |= std::uint64_t(1) << (i & 63);
        else if (values[i] != -1)
            throw InvalidArgumentError("pack: element " + std::to_string(i) +
                                       " is " + std::to_string(values[i]) +
                                       ", expected +1 or -1");
    }
    return v;
}

std::vector<int> unpack(const BitVector& v) {
    std::vector<int> out(v.len);
    for (std::size_t i = 0; i < v.len; ++i) out[i] = v.value_at(i);
    return out;
}

PruneMask make_mask(std::span<const int> active_flags) {
    PruneMask m;
    m.len = active_flags.size();
    m.words.assign(BitVector::word_count(m.len), 0);
    for (std::size_t i = 0; i < m.len; ++i) {
        if (active_flags[i] != 0) {
            m.words[i >> 6] |= std::uint64_t(1) << (i & 63);
            ++m.active;
        }
    }
    return m;
}

std::size_t popcount_range(const BitVector& v, std::size_t from, std::size_t to) {
    std::size_t count = 0;
    if (from >= to) return 0;
    const std::size_t w0 = from >> 6, w1 = (to - 1) >> 6;
    for (std::size_t w = w0; w <= w1; ++w) {
        std::uint64_t word = v.words[w];
        if (w == w0 && (from & 63)) word &= ~std::uint64_t(0) << (from & 63);
        if (w == w1 && (to & 63)) word &= (std::uint64_t(1) << (to & 63)) - 1;
        count += static_cast<std::size_t>(std::popcount(word));
    }
    return count;
}

std::int64_t xnor_popcount_dot(const BitVector& a, const BitVector& b,
                               const PruneMask* mask) {
    if (a.len != b.len)
        throw DimensionError("xnor_popcount_dot: lengths " + std::to_string(a.len) +
                             " vs " + std::to_string(b.len));
    const std::size_t nw = a.words.size();
    std::int64_t matches = 0;
    if (mask == nullptr) {
        for (std::size_t i = 0; i < nw; ++i) {
            std::uint64_t x = ~(a.words[i] ^ b.words[i]);
            if (i == nw - 1) x &= tail_mask(a.len); // pad bits must not count
            matches += std::popcount(x);
        }
        return 2 * matches - static_cast<std::int64_t>(a.len);
    }
    if (mask->len != a.len)
        throw DimensionError("xnor_popcount_dot: mask length " +
                             std::to_string(mask->len) + " vs " + std::to_string(a.len));
    for (std::size_t i = 0; i < nw; ++i) {
        // mask pad bits are zero, so no tail fixup needed here
        std::uint64_t x = ~(a.words[i] ^ b.words[i]) & mask->words[i];
        matches += std::popcount(x);
    }
    return 2 * matches - static_cast<std::int64_t>(mask->active);
}

} // namespace binnet
