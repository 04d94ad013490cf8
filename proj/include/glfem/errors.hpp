// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_ERRORS_HPP
#define GLFEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace glfem
{

// Base for every library-specific failure.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Linear or eigen solver breakdown (factorization failure, non-convergence, divergence).
class SolverError : public Error
{
public:
  using Error::Error;
};

// Two meshes are not related by uniform refinement.
class NotNestedError : public Error
{
public:
  using Error::Error;
};

// The complex L2 correlation with the reference field vanishes.
class AlignmentUndefined : public Error
{
public:
  using Error::Error;
};

// Field file or config file could not be read or is malformed.
class FormatError : public Error
{
public:
  using Error::Error;
};

// A hard a-priori bound on a discrete minimizer was violated.
class BoundViolation : public Error
{
public:
  using Error::Error;
};

}  // namespace glfem

#endif  // GLFEM_ERRORS_HPP
