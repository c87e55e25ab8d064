#pragma once

#include <stdexcept>
#include <string>

namespace mch {

/// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "error"; }
};

#define MCH_DEFINE_ERROR(Name, Kind)                                  \
    class Name : public Error {                                      \
    public:                                                           \
        explicit Name(const std::string& what) : Error(what) {}       \
        const char* kind() const noexcept override { return Kind; }   \
    }

MCH_DEFINE_ERROR(DomainError, "domain_error");
MCH_DEFINE_ERROR(SingularArcError, "singular_arc");
MCH_DEFINE_ERROR(SaddleOnArcError, "saddle_on_arc");
MCH_DEFINE_ERROR(NoIntersectionError, "no_intersection");
MCH_DEFINE_ERROR(NoPeakonError, "no_peakon");
MCH_DEFINE_ERROR(OrderingError, "ordering_error");
MCH_DEFINE_ERROR(IntegratorError, "integrator_error");
MCH_DEFINE_ERROR(QuadratureError, "quadrature_error");
MCH_DEFINE_ERROR(ResolutionError, "resolution_error");
MCH_DEFINE_ERROR(OverlapError, "overlap_error");
MCH_DEFINE_ERROR(StepError, "step_error");
MCH_DEFINE_ERROR(DivisionError, "division_error");
MCH_DEFINE_ERROR(IoError, "io_error");

#undef MCH_DEFINE_ERROR

} // namespace mch
