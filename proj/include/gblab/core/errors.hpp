#pragma once

#include <stdexcept>
#include <string>

namespace gblab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument values (out-of-range parameters, empty sample sets, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

/// ODE step produced non-finite values.
class IntegrationError : public Error {
public:
    using Error::Error;
};

class TrappedRayError : public Error {
public:
    using Error::Error;
};

class ChartError : public Error {
public:
    using Error::Error;
};

/// Im M lost positive definiteness during the Riccati evolution.
class RiccatiBlowupError : public Error {
public:
    using Error::Error;
};

class SingularYError : public Error {
public:
    using Error::Error;
};

/// The continuous branch of sqrt(det Y) could not be followed at this step size.
class BranchError : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class CflError : public Error {
public:
    using Error::Error;
};

class BlowupError : public Error {
public:
    BlowupError(const std::string& what, long step) : Error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

class FamilyError : public Error {
public:
    FamilyError(const std::string& what, int node) : Error(what), node_(node) {}
    int node() const noexcept { return node_; }

private:
    int node_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace gblab
