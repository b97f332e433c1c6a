#pragma once

#include <cstddef>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace forge {

// Malformed input: unknown generator, bad machine, bad file contents.
struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation needed a cell outside the finite window it was given.
struct BoundaryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Two zones or tentacles claimed the same cell while building a witness.
struct CollisionError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Global cap on enumeration sizes. FORGE_BUDGET overrides the default.
inline std::size_t global_budget() {
    constexpr std::size_t fallback = 4'000'000;
    if (const char* env = std::getenv("FORGE_BUDGET")) {
        try {
            auto v = std::stoull(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return fallback;
}

}  // namespace forge
