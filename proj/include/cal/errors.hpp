#pragma once

#include <stdexcept>
#include <string>

namespace cal {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Adding opposite infinities has no defined value.
class IndeterminateSum : public Error {
 public:
  IndeterminateSum() : Error("indeterminate sum: +inf + -inf") {}
};

/// Matrix/vector dimensions do not agree.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/// A document could not be parsed at all.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// A document parsed but violates a structural invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A node id does not exist in the model or trace.
class UnknownNode : public Error {
 public:
  explicit UnknownNode(const std::string& id) : Error("unknown node: " + id) {}
};

/// Trace refers to processes that the bound model does not declare.
class ModelMismatch : public Error {
 public:
  explicit ModelMismatch(const std::string& what) : Error(what) {}
};

/// Periodic sources carry mismatched timers, so the refined offset
/// derivation does not apply.
class AssumptionUnverifiable : public Error {
 public:
  explicit AssumptionUnverifiable(const std::string& what) : Error(what) {}
};

/// Budget was requested for a node that declares no deadline.
class NoDeadline : public Error {
 public:
  explicit NoDeadline(const std::string& id)
      : Error("node has no deadline: " + id) {}
};

/// A simulation scenario violates its own invariants.
class ScenarioInvalid : public Error {
 public:
  explicit ScenarioInvalid(const std::string& what) : Error(what) {}
};

/// Decentralized coordination requires an STA on every node with
/// logical network inputs.
class StaMissing : public Error {
 public:
  explicit StaMissing(const std::string& id)
      : Error("decentralized coordination requires sta on node: " + id) {}
};

}  // namespace cal
