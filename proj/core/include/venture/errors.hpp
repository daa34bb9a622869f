#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace venture {

// Every error raised by the VM carries a stable kind tag so the CLI and
// tests can dispatch on it without string matching the message.
class VentureError : public std::runtime_error {
 public:
  VentureError(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define VENTURE_ERROR(Name)                                              \
  class Name : public VentureError {                                    \
   public:                                                               \
    explicit Name(const std::string& msg) : VentureError(#Name, msg) {} \
  };

class ParseError : public VentureError {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : VentureError("ParseError", msg + " at offset " + std::to_string(pos)),
        position(pos) {}
  std::size_t position;
};

VENTURE_ERROR(ArityError)
VENTURE_ERROR(UnboundSymbol)
VENTURE_ERROR(TypeError)
VENTURE_ERROR(InvalidObservation)
VENTURE_ERROR(NotAbsorbing)
VENTURE_ERROR(CannotAbsorb)
VENTURE_ERROR(NoDensityBound)
VENTURE_ERROR(ComputeBudgetExceeded)
VENTURE_ERROR(SupportTooLarge)
VENTURE_ERROR(NonClonableAux)
VENTURE_ERROR(ForgetOfAssume)
VENTURE_ERROR(DanglingRequest)
VENTURE_ERROR(MissingLatent)
VENTURE_ERROR(MissingFamily)
VENTURE_ERROR(UnknownDirective)
VENTURE_ERROR(InvalidScope)
VENTURE_ERROR(UnknownScope)
VENTURE_ERROR(UnknownBlock)
VENTURE_ERROR(UnknownInstruction)
VENTURE_ERROR(InvalidInference)

#undef VENTURE_ERROR

}  // namespace venture
