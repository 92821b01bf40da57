#pragma once

#include <stdexcept>
#include <string>

namespace hfc {

/// Base class of every error raised by the library. `kind()` is the stable
/// name used in reports and by the Python bindings.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define HFC_DEFINE_ERROR(Name)                                          \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  }

HFC_DEFINE_ERROR(InvalidArgument);
HFC_DEFINE_ERROR(CommutationViolation);
HFC_DEFINE_ERROR(SingularResolvent);
HFC_DEFINE_ERROR(NotSimultaneouslyDiagonalizable);
HFC_DEFINE_ERROR(BranchCutViolation);
HFC_DEFINE_ERROR(DomainViolation);
HFC_DEFINE_ERROR(AngleOrderViolation);
HFC_DEFINE_ERROR(TypeTooLarge);
HFC_DEFINE_ERROR(DegenerateCalibration);
HFC_DEFINE_ERROR(NonSeparable);
HFC_DEFINE_ERROR(PreconditionViolation);
HFC_DEFINE_ERROR(SchemaError);
HFC_DEFINE_ERROR(IoError);

#undef HFC_DEFINE_ERROR

}  // namespace hfc
