// Copyright 2026 The Geolink Authors.
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

#ifndef GEOLINK_ERROR_HPP_
#define GEOLINK_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geolink {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-supplied data: unreadable files, malformed records, out-of-range
// arguments. The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

// An embedding provider could not produce a vector for `text`. `offset` is
// the position of the offending text in the batch that was being embedded.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, std::string text, std::size_t offset)
      : Error(what), text_(std::move(text)), offset_(offset) {}

  const std::string& text() const { return text_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string text_;
  std::size_t offset_;
};

}  // namespace geolink

#endif  // GEOLINK_ERROR_HPP_
