#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace certapprox {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point outside the domain of a basis element or target.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters for a rule, cover, basis, or extraction.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A function produced a non-finite value or hit a math domain violation.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double x) : Error(what), x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

/// Expression text that does not match the grammar.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected);
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Requested capability (e.g. a derivative) is not available.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed sample file.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Malformed certificate bytes; `path` names the offending field.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Construction finished without meeting the tolerance.
class ToleranceViolated : public Error {
 public:
  ToleranceViolated(const std::string& what, double achieved, double tolerance)
      : Error(what), achieved_(achieved), tolerance_(tolerance) {}
  double achieved() const noexcept { return achieved_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  double achieved_;
  double tolerance_;
};

class UnsupportedNorm : public Error {
 public:
  using Error::Error;
};

class IllConditionedBasis : public Error {
 public:
  IllConditionedBasis(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class NoProgress : public Error {
 public:
  using Error::Error;
};

/// Patches that were expected to intersect do not.
class TopologyError : public Error {
 public:
  using Error::Error;
};

class ReconciliationFailure : public Error {
 public:
  using Error::Error;
};

/// Gluing attempted with an overlap mismatch at or above the threshold.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// A Cauchy-ladder check contradicted the claimed modulus.
class EvidenceContradiction : public Error {
 public:
  EvidenceContradiction(const std::string& what, int n, int m)
      : Error(what), n_(n), m_(m) {}
  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }

 private:
  int n_;
  int m_;
};

class IncompleteSequence : public Error {
 public:
  IncompleteSequence(const std::string& what, int index) : Error(what), index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

}  // namespace certapprox
