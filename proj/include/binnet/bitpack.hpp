#ifndef BINNET_BITPACK_HPP
#define BINNET_BITPACK_HPP

#include <cstdint>
#include <cstddef>
#include <span>
#include <vector>

#include "binnet/errors.hpp"

namespace binnet {

// ---------------------------------------------------------------------------
// Bit-packed {-1,+1} vectors. Bit b at logical index i encodes +1 when set
// and -1 when clear. Packing is LSB-first into 64-bit words: element i lives
// in words[i/64] at bit position i%64. Bits at positions >= len in the last
// word are always zero; the dot-product kernel relies on that.
// ---------------------------------------------------------------------------

struct BitVector {
    std::vector<std::uint64_t> words;
    std::size_t len = 0;

    static std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

    static BitVector zeros(std::size_t n) {
        BitVector v;
        v.len = n;
        v.words.assign(word_count(n), 0);
        return v;
    }

    bool get(std::size_t i) const {
        return (words[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::size_t i, bool bit) {
        const std::uint64_t m = std::uint64_t(1) << (i & 63);
        if (bit)
            words[i >> 6] |= m;
        else
            words[i >> 6] &= ~m;
    }
    // Value of element i as +1/-1.
    int value_at(std::size_t i) const { return get(i) ? +1 : -1; }

    bool operator==(const BitVector& o) const {
        return len == o.len && words == o.words;
    }
};

// Per-synapse mask: set bit = weight participates, clear bit = pruned to zero.
// active caches the popcount over all words; pad bits are zero.
struct PruneMask {
    std::vector<std::uint64_t> words;
    std::size_t len = 0;
    std::size_t active = 0;

    bool get(std::size_t i) const {
        return (words[i >> 6] >> (i & 63)) & 1u;
    }

    bool operator==(const PruneMask& o) const {
        return len == o.len && words == o.words;
    }
};

// Bit-packed tensor; same channel-major/row/column ordering as U8Tensor.
struct BitTensor {
    BitVector data;
    std::uint32_t channels = 0, height = 0, width = 0;

    static BitTensor zeros(std::uint32_t c, std::uint32_t h, std::uint32_t w) {
        BitTensor t;
        t.channels = c;
        t.height = h;
        t.width = w;
        t.data = BitVector::zeros(static_cast<std::size_t>(c) * h * w);
        return t;
    }

    std::size_t index(std::size_t c, std::size_t y, std::size_t x) const {
        return (c * height + y) * width + x;
    }
    bool get(std::size_t c, std::size_t y, std::size_t x) const {
        return data.get(index(c, y, x));
    }
    void set(std::size_t c, std::size_t y, std::size_t x, bool bit) {
        data.set(index(c, y, x), bit);
    }

    bool operator==(const BitTensor& o) const {
        return channels == o.channels && height == o.height && width == o.width &&
               data == o.data;
    }
};

// sign with sign(0) = +1. Throws InvalidArgumentError on NaN/inf.
int binarize_scalar(double x);

// Pack a +1/-1 sequence; throws InvalidArgumentError on any other element.
BitVector pack(std::span<const int> values);

std::vector<int> unpack(const BitVector& v);

// Build a mask from 0/1 flags (nonzero = active).
PruneMask make_mask(std::span<const int> active_flags);

// Number of set bits in logical positions [from, to).
std::size_t popcount_range(const BitVector& v, std::size_t from, std::size_t to);

// Integer dot product of two packed +/-1 vectors via XNOR + popcount:
//   2 * popcount(~(a ^ b) & valid) - n.
// With a mask, pruned positions contribute zero and n becomes mask.active.
// Throws DimensionError on length mismatch.
std::int64_t xnor_popcount_dot(const BitVector& a, const BitVector& b,
                               const PruneMask* mask = nullptr);

} // namespace binnet

#endif
