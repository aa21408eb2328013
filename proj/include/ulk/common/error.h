// Copyright 2026 The ULK Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ULK_COMMON_ERROR_H_
#define ULK_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace ulk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Tensor or layer shape disagreement. The message names the offending layer.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Raised when a numeric value that must be finite is NaN or Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Binary/text format problems. Each subclass is a distinct failure mode so
// callers (and tests) can tell them apart.
class FormatError : public Error {
 public:
  using Error::Error;
};
class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};
class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};
class ByteCountError : public FormatError {
 public:
  using FormatError::FormatError;
};
class PayloadError : public FormatError {
 public:
  using FormatError::FormatError;
};
class CountMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ParseError : public FormatError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : FormatError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// The amnesiac ledger does not belong to the model it is applied to.
class LedgerMismatchError : public Error {
 public:
  using Error::Error;
};

// Every white-box initialization produced a non-finite loss.
class DivergedError : public Error {
 public:
  using Error::Error;
};

// Input that admits no meaningful answer (single label, < 2 distinct values).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace ulk

#endif  // ULK_COMMON_ERROR_H_
