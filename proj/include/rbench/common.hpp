// Copyright 2026 The rbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RBENCH_COMMON_HPP
#define RBENCH_COMMON_HPP

#include <stdexcept>
#include <string>

namespace rbench {

/// Numerical tolerances shared by every module.
namespace tol {
/// Structural checks: Hermiticity, trace, ptm first row, twirl form.
inline constexpr double kStructural = 1e-12;
/// Slack on eigenvalue positivity (Choi test, density operators, effects).
inline constexpr double kPositivity = 1e-10;
/// U^dagger U = I and Kraus completeness.
inline constexpr double kUnitarity = 1e-10;
}  // namespace tol

/// Base of all errors raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Input outside an operation's domain. Maps to CLI exit code 2.
class ValidationError : public Error {
   public:
    using Error::Error;
};

/// Requested computation exceeds a configured budget. Exit code 3.
class ResourceError : public Error {
   public:
    using Error::Error;
};

/// A feature deliberately not supported (n >= 3, time-dependent first-order oracle).
class UnsupportedError : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

/// Internal invariant violated; indicates a bug or corrupted state. Exit code 4.
class InvariantError : public Error {
   public:
    using Error::Error;
};

}  // namespace rbench

#endif  // RBENCH_COMMON_HPP
