#pragma once

#include <stdexcept>
#include <string>

namespace adatom {

// Module-level failures surfaced to callers (the CLI maps these to exit status 3).
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

struct ConstructionError : std::runtime_error {
    explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

struct FrequencyError : std::runtime_error {
    explicit FrequencyError(const std::string& what) : std::runtime_error(what) {}
};

struct ResolutionError : std::runtime_error {
    int largest_usable_k = 0;
    ResolutionError(const std::string& what, int usable_k)
        : std::runtime_error(what), largest_usable_k(usable_k) {}
};

struct FrameError : std::runtime_error {
    explicit FrameError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidDensityError : std::runtime_error {
    explicit InvalidDensityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace adatom
