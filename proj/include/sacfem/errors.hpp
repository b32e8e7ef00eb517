#pragma once

#include <stdexcept>
#include <string>

namespace sacfem {

/// Tetrahedron with (near) zero volume; carries the offending element id.
class DegenerateElementError : public std::runtime_error {
 public:
  DegenerateElementError(int element, const std::string& what)
      : std::runtime_error(what), element_(element) {}
  int element() const noexcept { return element_; }

 private:
  int element_;
};

/// Non-finite displacement detected while time stepping.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(long step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class CommunicationError : public std::runtime_error {
 public:
  CommunicationError(int rank, const std::string& what)
      : std::runtime_error(what), rank_(rank) {}
  int rank() const noexcept { return rank_; }

 private:
  int rank_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lumped system cannot be inverted (non-positive diagonal entry).
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(int epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace sacfem
