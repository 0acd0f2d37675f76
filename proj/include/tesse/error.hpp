// Copyright 2026 The tesse-lite Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace tesse {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scene generation parameters cannot be satisfied.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Scene JSON does not conform to the schema. path() is a JSON pointer.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class PlacementError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Operation not allowed in the current session or episode state.
class StateError : public Error {
 public:
  using Error::Error;
};

class EpisodeFinishedError : public StateError {
 public:
  using StateError::StateError;
};

/// Malformed or unknown wire message; the session is closed after reporting.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Connection-level failure in a network client.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace tesse
