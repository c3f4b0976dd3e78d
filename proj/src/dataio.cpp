#include "binnet/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binnet/errors.hpp"
#include "binnet/rng.hpp"

namespace binnet {

int LabeledDataset::num_classes() const {
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    return max_label + 1;
}

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t be32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | static_cast<std::uint32_t>(p[3]);
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                           static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(bytes, 4);
}

constexpr std::uint32_t kIdxImagesMagic = 2051;
constexpr std::uint32_t kIdxLabelsMagic = 2049;

} // namespace

LabeledDataset load_mnist(const std::string& images_path,
                          const std::string& labels_path) {
    const std::vector<std::uint8_t> ib = read_file(images_path);
    const std::vector<std::uint8_t> lb = read_file(labels_path);

    if (ib.size() >= 4 && be32(ib.data()) != kIdxImagesMagic)
        throw FormatError(FormatError::Kind::BadMagic,
                          images_path + ": IDX image magic is " +
                              std::to_string(be32(ib.data())) + ", expected 2051");
    if (ib.size() < 16)
        throw FormatError(FormatError::Kind::Truncated,
                          images_path + ": IDX image header needs 16 bytes, file has " +
                              std::to_string(ib.size()));
    const std::uint32_t count = be32(ib.data() + 4);
    const std::uint32_t rows = be32(ib.data() + 8);
    const std::uint32_t cols = be32(ib.data() + 12);
    if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
        throw FormatError(FormatError::Kind::Malformed,
                          images_path + ": implausible image dims " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    const std::uint64_t expected =
        16 + static_cast<std::uint64_t>(count) * rows * cols;
    if (ib.size() != expected)
        throw FormatError(FormatError::Kind::Truncated,
                          images_path + ": payload is " + std::to_string(ib.size()) +
                              " bytes, expected " + std::to_string(expected));

    if (lb.size() >= 4 && be32(lb.data()) != kIdxLabelsMagic)
        throw FormatError(FormatError::Kind::BadMagic,
                          labels_path + ": IDX label magic is " +
                              std::to_string(be32(lb.data())) + ", expected 2049");
    if (lb.size() < 8)
        throw FormatError(FormatError::Kind::Truncated,
                          labels_path + ": IDX label header needs 8 bytes, file has " +
                              std::to_string(lb.size()));
    const std::uint32_t label_count = be32(lb.data() + 4);
    if (label_count != count)
        throw FormatError(FormatError::Kind::Malformed,
                          "image/label counts differ: " + std::to_string(count) + " vs " +
                              std::to_string(label_count));
    if (lb.size() != 8 + static_cast<std::uint64_t>(label_count))
        throw FormatError(FormatError::Kind::Truncated,
                          labels_path + ": payload is " + std::to_string(lb.size()) +
                              " bytes, expected " + std::to_string(8 + label_count));

    LabeledDataset ds;
    ds.images.reserve(count);
    ds.labels.reserve(count);
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (std::uint32_t i = 0; i < count; ++i) {
        U8Tensor t;
        t.channels = 1;
        t.height = rows;
        t.width = cols;
        t.data.assign(ib.begin() + 16 + i * plane, ib.begin() + 16 + (i + 1) * plane);
        ds.images.push_back(std::move(t));
        ds.labels.push_back(lb[8 + i]);
    }
    return ds;
}

void write_idx_images(const std::vector<U8Tensor>& images, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const std::uint32_t rows = images.empty() ? 0 : images[0].height;
    const std::uint32_t cols = images.empty() ? 0 : images[0].width;
    put_be32(out, kIdxImagesMagic);
    put_be32(out, static_cast<std::uint32_t>(images.size()));
    put_be32(out, rows);
    put_be32(out, cols);
    for (const U8Tensor& img : images) {
        if (img.channels != 1 || img.height != rows || img.width != cols)
            throw InvalidArgumentError("write_idx_images: images must be uniform 1xHxW");
        out.write(reinterpret_cast<const char*>(img.data.data()),
                  static_cast<std::streamsize>(img.data.size()));
    }
    if (!out) throw IoError("write failed for " + path);
}

void write_idx_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    put_be32(out, kIdxLabelsMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        if (l < 0 || l > 255)
            throw InvalidArgumentError("write_idx_labels: label out of byte range");
        const char b = static_cast<char>(l);
        out.write(&b, 1);
    }
    if (!out) throw IoError("write failed for " + path);
}

LabeledDataset load_cifar10(const std::vector<std::string>& batch_paths) {
    constexpr std::size_t kRecord = 3073; // 1 label byte + 3x32x32 pixels
    LabeledDataset ds;
    ds.class_names = {"airplane", "automobile", "bird", "cat",   "deer",
                      "dog",      "frog",       "horse", "ship", "truck"};
    for (const std::string& path : batch_paths) {
        const std::vector<std::uint8_t> bytes = read_file(path);
        if (bytes.size() % kRecord != 0)
            throw FormatError(FormatError::Kind::Truncated,
                              path + ": size " + std::to_string(bytes.size()) +
                                  " is not a multiple of 3073");
        const std::size_t count = bytes.size() / kRecord;
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint8_t* rec = bytes.data() + i * kRecord;
            if (rec[0] >= 10)
                throw FormatError(FormatError::Kind::Malformed,
                                  path + ": label " + std::to_string(rec[0]) +
                                      " out of range at record " + std::to_string(i));
            U8Tensor t;
            t.channels = 3;
            t.height = 32;
            t.width = 32;
            t.data.assign(rec + 1, rec + kRecord); // already channel-major RGB
            ds.images.push_back(std::move(t));
            ds.labels.push_back(rec[0]);
        }
    }
    return ds;
}

namespace {

// Next header token in a PNM file, skipping whitespace and '#' comments.
std::string pnm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                      const std::string& path) {
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
        tok.push_back(c);
        ++pos;
    }
    if (tok.empty())
        throw FormatError(FormatError::Kind::Truncated, path + ": PNM header truncated");
    return tok;
}

std::uint32_t pnm_number(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                         const std::string& path, const char* what) {
    const std::string tok = pnm_token(bytes, pos, path);
    std::uint64_t v = 0;
    for (char c : tok) {
        if (c < '0' || c > '9')
            throw FormatError(FormatError::Kind::Malformed,
                              path + ": bad " + what + " '" + tok + "'");
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
        if (v > 1u << 20)
            throw FormatError(FormatError::Kind::Malformed,
                              path + ": " + what + " out of range");
    }
    return static_cast<std::uint32_t>(v);
}

} // namespace

U8Tensor load_image(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    std::size_t pos = 0;
    const std::string magic = pnm_token(bytes, pos, path);
    std::uint32_t channels = 0;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw FormatError(FormatError::Kind::BadMagic,
                          path + ": unsupported image magic '" + magic +
                              "' (binary P5/P6 only)");
    const std::uint32_t width = pnm_number(bytes, pos, path, "width");
    const std::uint32_t height = pnm_number(bytes, pos, path, "height");
    const std::uint32_t maxval = pnm_number(bytes, pos, path, "maxval");
    if (width == 0 || height == 0)
        throw FormatError(FormatError::Kind::Malformed, path + ": zero image dims");
    if (maxval != 255)
        throw FormatError(FormatError::Kind::Unsupported,
                          path + ": maxval " + std::to_string(maxval) +
                              " unsupported (255 only)");
    if (pos >= bytes.size())
        throw FormatError(FormatError::Kind::Truncated, path + ": missing pixel data");
    ++pos; // single whitespace byte after maxval

    const std::size_t pixels = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() - pos < pixels)
        throw FormatError(FormatError::Kind::Truncated,
                          path + ": pixel payload is " + std::to_string(bytes.size() - pos) +
                              " bytes, expected " + std::to_string(pixels));

    U8Tensor t = U8Tensor::zeros(channels, height, width);
    if (channels == 1) {
        std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + pixels),
                  t.data.begin());
    } else {
        // interleaved RGB -> channel-major
        const std::size_t plane = static_cast<std::size_t>(width) * height;
        for (std::size_t i = 0; i < plane; ++i)
            for (std::uint32_t c = 0; c < 3; ++c)
                t.data[c * plane + i] = bytes[pos + i * 3 + c];
    }
    return t;
}

void write_image(const U8Tensor& image, const std::string& path) {
    if (image.channels != 1 && image.channels != 3)
        throw InvalidArgumentError("write_image: only 1 or 3 channels supported");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << (image.channels == 1 ? "P5" : "P6") << "\n"
        << image.width << " " << image.height << "\n255\n";
    if (image.channels == 1) {
        out.write(reinterpret_cast<const char*>(image.data.data()),
                  static_cast<std::streamsize>(image.data.size()));
    } else {
        const std::size_t plane = static_cast<std::size_t>(image.width) * image.height;
        for (std::size_t i = 0; i < plane; ++i)
            for (std::uint32_t c = 0; c < 3; ++c)
                out.put(static_cast<char>(image.data[c * plane + i]));
    }
    if (!out) throw IoError("write failed for " + path);
}

std::pair<LabeledDataset, LabeledDataset> split_shuffle(const LabeledDataset& data,
                                                        double fraction,
                                                        std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InvalidArgumentError("split_shuffle: fraction must be in (0,1)");
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    SplitMix64 rng(seed);
    for (std::size_t i = n; i > 1; --i) { // Fisher-Yates, splitmix64 stream
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(order[i - 1], order[j]);
    }

    const std::size_t train_n =
        static_cast<std::size_t>(std::min<double>(
            static_cast<double>(n),
            std::ceil(fraction * static_cast<double>(n))));
    LabeledDataset train, val;
    train.class_names = data.class_names;
    val.class_names = data.class_names;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledDataset& dst = i < train_n ? train : val;
        dst.images.push_back(data.images[order[i]]);
        dst.labels.push_back(data.labels[order[i]]);
    }
    return {std::move(train), std::move(val)};
}

} // namespace binnet
