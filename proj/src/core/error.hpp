// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace segsplat {

enum class ErrorCode {
  invalid_input,
  io_error,
  format_error,
  empty_target,
  degenerate_plane,
  undefined_metric,
  diverged,
  generation_failed,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace segsplat
