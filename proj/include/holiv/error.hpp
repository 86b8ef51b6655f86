#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace holiv {

// Typed error kinds. Every failure the library can raise carries one of
// these so callers (and the C API) can switch on the condition instead of
// parsing message strings.
enum class Err {
  SingularInput,
  ZeroMatrix,
  IllConditioned,
  SpanNotSaturated,
  NotIrreducible,
  DimensionMismatch,
  DegenerateZ,
  MissingWord,
  NotHyperbolic,
  TooFar,
  JumpTooLarge,
  BudgetExceeded,
  NotOnStableLeaf,
  TolUnreachable,
  RankMismatch,
  EmptyOrbitList,
  InsufficientPowers,
  NearSingularNode,
  CoverGap,
  EmptyChart,
  DegenerateBasis,
  ParseError,
  InvalidArgument,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}

  Err code() const { return code_; }

  // Pipeline stage that raised the error; empty outside orchestrated runs.
  const std::string& stage() const { return stage_; }
  void set_stage(std::string s) { stage_ = std::move(s); }

 private:
  Err code_;
  std::string stage_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace holiv
