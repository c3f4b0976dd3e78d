#ifndef BINNET_MANIFEST_HPP
#define BINNET_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "binnet/netgraph.hpp"

namespace binnet {

// ---------------------------------------------------------------------------
// Plain-text float model manifest ("bnnf"): the hand-off format from an
// external float training run. Sequential chains only; grammar in
// docs/manifest_format.md with golden files under docs/golden/.
// ---------------------------------------------------------------------------

struct ManifestBN {
    double eps = 0.0;
    std::vector<double> gamma, beta, mean, var;
};

struct ManifestItem {
    enum class Kind { Conv, Dense, MaxPool, GlobalAvgPool, Sign, BN, Head };
    Kind kind = Kind::Sign;

    // Conv
    std::uint32_t out = 0, in = 0, kh = 0, kw = 0, stride = 1, pad = 0;
    // Dense reuses out (rows) / in (cols); MaxPool reuses kh (k), stride, pad.
    std::vector<double> weights; // conv/dense/head weights
    std::vector<double> bias;    // head only
    ManifestBN bn;               // BN only
};

struct FloatModelManifest {
    std::string name;
    std::vector<std::string> labels;
    std::uint32_t in_channels = 0, in_height = 0, in_width = 0;
    std::uint8_t input_threshold = 128;
    std::vector<ManifestItem> items;
};

// Throws FormatError (Malformed/Truncated) on grammar or count violations.
FloatModelManifest parse_manifest(const std::string& text);
FloatModelManifest load_manifest(const std::string& path);

// Float weights -> sign-binarized packed layers; each BN folds into an
// integer ThresholdSet against its layer's fan-in; `sign` becomes a plain
// t=0 threshold; a trailing head keeps its real weights. The result is
// validated before returning.
ModelGraph convert(const FloatModelManifest& manifest);

} // namespace binnet

#endif
