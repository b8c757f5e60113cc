#pragma once

#include <stdexcept>
#include <string>

namespace isoflow {

/// A numerical procedure failed (non-finite values, non-convergence, degenerate fit).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace isoflow
