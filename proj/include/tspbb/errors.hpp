/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <stdexcept>
#include <string>

namespace tspbb {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_instance_error : public error {
 public:
  using error::error;
};

// Raised by parse_lp. line() is 1-based, 0 when not tied to a line.
class lp_parse_error : public error {
 public:
  lp_parse_error(const std::string& what, int line)
    : error("line " + std::to_string(line) + ": " + what), line_(line)
  {
  }
  int line() const { return line_; }

 private:
  int line_;
};

class unsupported_sense_error : public lp_parse_error {
 public:
  using lp_parse_error::lp_parse_error;
};

class not_a_tour_error : public error {
 public:
  using error::error;
};

class oracle_too_large_error : public error {
 public:
  using error::error;
};

class misuse_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class schema_error : public error {
 public:
  using error::error;
};

class unbounded_lp_error : public error {
 public:
  using error::error;
};

class divergence_error : public error {
 public:
  using error::error;
};

/// A branching rule could not produce a decision (e.g. a strong-branching
/// probe hit the LP iteration limit). The search falls back to another rule.
class rule_failure_error : public error {
 public:
  using error::error;
};

class split_error : public error {
 public:
  using error::error;
};

class aggregation_error : public error {
 public:
  using error::error;
};

}  // namespace tspbb
