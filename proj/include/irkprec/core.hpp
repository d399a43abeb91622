#ifndef IRKPREC_CORE_HPP
#define IRKPREC_CORE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irkprec {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define IRKPREC_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

IRKPREC_DEFINE_ERROR(UnsupportedScheme);
IRKPREC_DEFINE_ERROR(ConstructionFailure);
IRKPREC_DEFINE_ERROR(EigenFailure);
IRKPREC_DEFINE_ERROR(StabilityViolation);
IRKPREC_DEFINE_ERROR(DimensionMismatch);
IRKPREC_DEFINE_ERROR(FactorizationFailure);
IRKPREC_DEFINE_ERROR(Breakdown);
IRKPREC_DEFINE_ERROR(SingularSystem);
IRKPREC_DEFINE_ERROR(SingularShift);
IRKPREC_DEFINE_ERROR(UnsupportedOrder);
IRKPREC_DEFINE_ERROR(InvalidArgument);

#undef IRKPREC_DEFINE_ERROR

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

inline void require_same_size(Index a, Index b, const char* where) {
  if (a != b)
    throw DimensionMismatch(std::string(where) + ": " + std::to_string(a) +
                            " vs " + std::to_string(b));
}

}  // namespace irkprec

#endif  // IRKPREC_CORE_HPP
