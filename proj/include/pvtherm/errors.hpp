#pragma once

#include <stdexcept>
#include <string>

namespace pvtherm {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raster or parameter violates a documented invariant.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Constant image: min level equals max level, stretching is undefined.
class DegenerateRange : public Error {
public:
    using Error::Error;
};

/// Two rasters that must share dimensions do not.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Aggregation over an empty row list.
class EmptyInput : public Error {
public:
    using Error::Error;
};

/// Synthetic defect geometry extends outside the panel.
class OutOfBoundsDefect : public Error {
public:
    using Error::Error;
};

/// File missing, truncated, or otherwise undecodable.
class UnreadableFile : public Error {
public:
    using Error::Error;
};

/// File exists but is not a format this library handles.
class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

/// CSV rows have differing lengths.
class RaggedRows : public Error {
public:
    using Error::Error;
};

/// CSV entry is NaN, infinite, or not a number at all.
class NonFiniteValue : public Error {
public:
    using Error::Error;
};

/// Manifest references a file that does not exist.
class MissingFile : public Error {
public:
    using Error::Error;
};

/// Two manifest entries share a module id.
class DuplicateId : public Error {
public:
    using Error::Error;
};

} // namespace pvtherm
