#ifndef BINNET_DATAIO_HPP
#define BINNET_DATAIO_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "binnet/tensor.hpp"

namespace binnet {

struct LabeledDataset {
    std::vector<U8Tensor> images; // uniform C x H x W
    std::vector<int> labels;
    std::vector<std::string> class_names; // optional

    std::size_t size() const { return images.size(); }
    int num_classes() const;
};

// MNIST IDX pair: big-endian u32 magic 2051 (images) / 2049 (labels), dims,
// raw u8 payload. Image/label counts are cross-checked. Distinct FormatError
// kinds for bad magic, dimension mismatch and truncation.
LabeledDataset load_mnist(const std::string& images_path,
                          const std::string& labels_path);

// IDX writers (round-trip fixtures and exporting generated corpora).
void write_idx_images(const std::vector<U8Tensor>& images, const std::string& path);
void write_idx_labels(const std::vector<int>& labels, const std::string& path);

// CIFAR-10 binary batches: records of 1 label byte + 3072 channel-major
// pixels (3x32x32). File size must divide by 3073 and labels must be < 10.
LabeledDataset load_cifar10(const std::vector<std::string>& batch_paths);

// Binary PGM (P5) / PPM (P6), maxval 255 only; header comments skipped.
// PPM pixels arrive interleaved and are stored channel-major.
U8Tensor load_image(const std::string& path);
void write_image(const U8Tensor& image, const std::string& path); // PGM or PPM by channels

// Deterministic split: splitmix64-seeded Fisher-Yates permutation, first
// ceil(fraction*N) to train. fraction must be in (0,1).
std::pair<LabeledDataset, LabeledDataset> split_shuffle(const LabeledDataset& data,
                                                        double fraction,
                                                        std::uint64_t seed);

} // namespace binnet

#endif
