#ifndef BINNET_ERRORS_HPP
#define BINNET_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace binnet {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad value passed by the caller (non-finite scalar, element outside {-1,+1}, ...).
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

// Incompatible lengths/shapes between operands or layers.
class DimensionError : public Error {
public:
    using Error::Error;
};

// BN fold with var+eps == 0.
class SingularParamError : public Error {
public:
    using Error::Error;
};

// Graph validation failure; carries the index of the first offending layer.
class ValidationError : public Error {
public:
    ValidationError(std::size_t layer_index, const std::string& layer_name,
                    const std::string& msg)
        : Error("layer " + std::to_string(layer_index) + " (" + layer_name + "): " + msg),
          layer_index(layer_index), layer_name(layer_name) {}
    std::size_t layer_index;
    std::string layer_name;
};

// Folding plan cannot meet the FPS target; names the bottleneck layer.
class InfeasibleError : public Error {
public:
    InfeasibleError(std::size_t layer_index, const std::string& layer_name,
                    const std::string& msg)
        : Error("infeasible at layer " + std::to_string(layer_index) + " (" + layer_name +
                "): " + msg),
          layer_index(layer_index), layer_name(layer_name) {}
    std::size_t layer_index;
    std::string layer_name;
};

// File could not be opened/read/written at the OS level.
class IoError : public Error {
public:
    using Error::Error;
};

// Structured parse failure in a model or dataset file. Every loader failure
// maps to one of these kinds; loaders never crash on malformed bytes.
class FormatError : public Error {
public:
    enum class Kind {
        BadMagic,
        BadVersion,
        Checksum,
        Truncated,
        Malformed,
        Unsupported,
    };

    FormatError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}
    Kind kind;
};

} // namespace binnet

#endif
