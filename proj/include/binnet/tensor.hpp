#ifndef BINNET_TENSOR_HPP
#define BINNET_TENSOR_HPP

#include <cstdint>
#include <cstddef>
#include <vector>

namespace binnet {

// Dense tensors used at the edges of the binary pipeline. Indexing is
// channel-major, then row, then column: data[(c*height + y)*width + x].

struct U8Tensor {
    std::vector<std::uint8_t> data;
    std::uint32_t channels = 0, height = 0, width = 0;

    std::size_t size() const { return data.size(); }
    std::size_t index(std::size_t c, std::size_t y, std::size_t x) const {
        return (c * height + y) * width + x;
    }
    std::uint8_t at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[index(c, y, x)];
    }
    std::uint8_t& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[index(c, y, x)];
    }

    static U8Tensor zeros(std::uint32_t c, std::uint32_t h, std::uint32_t w) {
        U8Tensor t;
        t.channels = c;
        t.height = h;
        t.width = w;
        t.data.assign(static_cast<std::size_t>(c) * h * w, 0);
        return t;
    }
};

// Integer pre-activation sums produced by binary conv/dense layers.
struct IntTensor {
    std::vector<std::int32_t> data;
    std::uint32_t channels = 0, height = 0, width = 0;

    std::size_t size() const { return data.size(); }
    std::size_t index(std::size_t c, std::size_t y, std::size_t x) const {
        return (c * height + y) * width + x;
    }
    std::int32_t at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[index(c, y, x)];
    }
    std::int32_t& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[index(c, y, x)];
    }

    static IntTensor zeros(std::uint32_t c, std::uint32_t h, std::uint32_t w) {
        IntTensor t;
        t.channels = c;
        t.height = h;
        t.width = w;
        t.data.assign(static_cast<std::size_t>(c) * h * w, 0);
        return t;
    }
};

} // namespace binnet

#endif
