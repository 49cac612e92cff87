#pragma once

#include <stdexcept>
#include <string>

namespace pcdg {

/// Base class for all pcdg failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// geometry
struct DegenerateTriangle : Error { using Error::Error; };
struct RankDeficientFit : Error { using Error::Error; };
struct InsufficientPoints : Error { using Error::Error; };
struct NewtonDiverged : Error { using Error::Error; };
struct SingularMetric : Error { using Error::Error; };

// meshgen
struct NonManifoldMesh : Error { using Error::Error; };
struct OpenSurface : Error { using Error::Error; };
struct InvertedOrientation : Error { using Error::Error; };

// dgcore
struct NonConformingEdge : Error { using Error::Error; };

// solve
struct NotPositiveDefinite : Error { using Error::Error; };
struct SolverStagnation : Error { using Error::Error; };

// analyze
struct MultiplicityMismatch : Error { using Error::Error; };

// io / configuration
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace pcdg
