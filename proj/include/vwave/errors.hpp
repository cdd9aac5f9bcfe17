#pragma once

#include <stdexcept>
#include <string>

namespace vwave {

/// Base class for every error raised by the solver pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-point iteration of a lattice cell did not reach its tolerance.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, int i, int m)
      : Error(what), i_(i), m_(m) {}
  int i() const { return i_; }
  int m() const { return m_; }

 private:
  int i_;
  int m_;
};

/// A cell update produced t < 0.
class DomainExit : public Error {
 public:
  using Error::Error;
};

class EmptyLevelSet : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class ProviderGap : public Error {
 public:
  using Error::Error;
};

class MismatchedStart : public Error {
 public:
  using Error::Error;
};

class CFLViolation : public Error {
 public:
  using Error::Error;
};

class BlowupSuspected : public Error {
 public:
  BlowupSuspected(const std::string& what, double t) : Error(what), t_(t) {}
  /// Time of the last step that stayed below the cap.
  double time() const { return t_; }

 private:
  double t_;
};

class WindowMismatch : public Error {
 public:
  using Error::Error;
};

class MissingArtifacts : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vwave
