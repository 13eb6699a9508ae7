#pragma once

#include <stdexcept>
#include <string>

namespace vlcsec {

/// Base class for every error thrown by this library, so callers can catch
/// one type at the boundary.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Degenerate or impossible geometry: coincident points, zero-length
/// directions, panels that do not fit their wall.
struct GeometryError : Error {
  using Error::Error;
};

/// Invalid configuration: violated type invariants or malformed config files.
/// Messages name the offending field path.
struct ConfigError : Error {
  using Error::Error;
};

/// The frequency quadrature did not converge at the configured resolution.
struct QuadratureError : Error {
  using Error::Error;
};

/// A mathematically undefined request, e.g. enhancement over a zero baseline.
struct DomainError : Error {
  using Error::Error;
};

/// Filesystem failure; messages carry the path involved.
struct IoError : Error {
  using Error::Error;
};

}  // namespace vlcsec
