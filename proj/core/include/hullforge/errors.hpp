// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hullforge {

/// All recoverable failures carry a short category tag ("io", "parse",
/// "config", "validation", "shape", "training", "usage") that the CLI turns
/// into a single machine-parsable stderr line: error:<category>: <message>
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

}  // namespace hullforge
