#pragma once

#include <stdexcept>
#include <string>

namespace selftest {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonHermitian : Error {
    explicit NonHermitian(const std::string& what) : Error(what) {}
};

struct NotPure : Error {
    explicit NotPure(const std::string& what) : Error(what) {}
};

struct AngleOutOfRange : Error {
    explicit AngleOutOfRange(const std::string& what) : Error(what) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct NotBinaryObservable : Error {
    explicit NotBinaryObservable(const std::string& what) : Error(what) {}
};

struct OddDimensionAfterPadding : Error {
    explicit OddDimensionAfterPadding(const std::string& what) : Error(what) {}
};

struct ProjectorMismatch : Error {
    explicit ProjectorMismatch(const std::string& what) : Error(what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(what) {}
};

struct BetaOutOfRange : Error {
    explicit BetaOutOfRange(const std::string& what) : Error(what) {}
};

struct GammaOutOfRange : Error {
    explicit GammaOutOfRange(const std::string& what) : Error(what) {}
};

struct ProbabilityOutOfRange : Error {
    explicit ProbabilityOutOfRange(const std::string& what) : Error(what) {}
};

struct InvalidGrid : Error {
    explicit InvalidGrid(const std::string& what) : Error(what) {}
};

struct InvalidRange : Error {
    explicit InvalidRange(const std::string& what) : Error(what) {}
};

struct IOError : Error {
    explicit IOError(const std::string& what) : Error(what) {}
};

}  // namespace selftest
