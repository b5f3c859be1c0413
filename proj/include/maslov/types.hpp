#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace maslov {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input matrix has inconsistent dimensions (e.g. rows != 2*cols for a frame).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A subspace that must be transverse to a reference is not.
class TransversalityError : public Error {
public:
    using Error::Error;
};

/// A crossing of the singular cycle is tangential or multi-dimensional.
class DegenerateCrossingError : public Error {
public:
    using Error::Error;
};

/// Phase unwrapping cannot satisfy its per-step guard on a non-refinable path.
class AliasingError : public Error {
public:
    using Error::Error;
};

/// Generic numerical failure (non-finite state, isotropy drift, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Bad run configuration (CLI layer).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Tolerances shared across the library. All defaults are overridable; the
/// *_rel entries scale with the magnitude of the data they gate.
struct Tolerances {
    double rank_tol = 1e-8;           // frame rank test, relative to frame norm
    double iso_tol = 1e-8;            // isotropy defect, relative
    double sig_tol_rel = 1e-8;        // signature zero-band, times ||S||
    double angle_tol = 1e-7;          // "angle equals pi/2" classification
    double unwrap_guard = kPi / 2.0;  // max |d arg Delta| per unwrap step
    double residual_tol = 1e-3;       // | alpha_mi - boundary - mi |
    double time_tol_rel = 1e-10;      // crossing bisection, times horizon
    double vel_tol = 1e-6;            // angle velocity at a crossing
    double conformal_tol = 1e-6;      // || M^T J M - c(t) J ||
    double twist_margin_rel = 1e-9;   // strict-twist zero band, scale-aware
    double h_fd = 1e-5;               // finite differences, times (1+|x|)
    double conv_tol = 1e-3;           // Cauchy gap for asymptotic estimates
    double escape_bound = 1e6;        // relative-compactness guard
};

/// Library-wide default tolerances.
const Tolerances& default_tols();

}  // namespace maslov
