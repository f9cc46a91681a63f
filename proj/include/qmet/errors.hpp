#pragma once

#include <stdexcept>
#include <string>

namespace qmet {

struct NonHermitianError : std::runtime_error {
  explicit NonHermitianError(const std::string& what) : std::runtime_error(what) {}
};

struct IndefiniteMatrixError : std::runtime_error {
  explicit IndefiniteMatrixError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularQfimError : std::runtime_error {
  explicit SingularQfimError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateOutcomeError : std::runtime_error {
  explicit DegenerateOutcomeError(const std::string& what) : std::runtime_error(what) {}
};

struct NonUnitaryCoinError : std::runtime_error {
  explicit NonUnitaryCoinError(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfRangeError : std::runtime_error {
  explicit OutOfRangeError(const std::string& what) : std::runtime_error(what) {}
};

struct NonOrthonormalBasisError : std::runtime_error {
  explicit NonOrthonormalBasisError(const std::string& what) : std::runtime_error(what) {}
};

struct ComplexBetaError : std::runtime_error {
  explicit ComplexBetaError(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyCountsError : std::runtime_error {
  explicit EmptyCountsError(const std::string& what) : std::runtime_error(what) {}
};

struct SingularCovarianceError : std::runtime_error {
  explicit SingularCovarianceError(const std::string& what) : std::runtime_error(what) {}
};

struct NoImprovementError : std::runtime_error {
  explicit NoImprovementError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qmet
