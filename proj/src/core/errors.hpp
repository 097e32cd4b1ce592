#pragma once

#include <stdexcept>
#include <string>

namespace wmkit {

// Error taxonomy shared by the C++ core and mirrored by the C API status codes.
enum class Err {
  io = 1,
  format,
  dimension,
  capacity,
  domain,
  infeasible,
  training,
  init_failure,
  budget,
  invalid_argument,
  internal,
};

struct Error : std::runtime_error {
  Err code;
  Error(Err c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

[[noreturn]] inline void fail(Err c, const std::string& msg) { throw Error(c, msg); }

inline const char* err_name(Err c) {
  switch (c) {
    case Err::io: return "io";
    case Err::format: return "format";
    case Err::dimension: return "dimension";
    case Err::capacity: return "capacity";
    case Err::domain: return "domain";
    case Err::infeasible: return "infeasible";
    case Err::training: return "training";
    case Err::init_failure: return "init-failure";
    case Err::budget: return "budget";
    case Err::invalid_argument: return "invalid-argument";
    case Err::internal: return "internal";
  }
  return "unknown";
}

}  // namespace wmkit
