#pragma once

#include <stdexcept>
#include <string>

namespace qframes {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define QFRAMES_DEFINE_ERROR(Name)          \
  struct Name : Error {                     \
    using Error::Error;                     \
  }

QFRAMES_DEFINE_ERROR(NonCyclicError);
QFRAMES_DEFINE_ERROR(ArityError);
QFRAMES_DEFINE_ERROR(MissingTrajectoryError);
QFRAMES_DEFINE_ERROR(SingularMapError);
QFRAMES_DEFINE_ERROR(UnsupportedGeneratorError);
QFRAMES_DEFINE_ERROR(NonQuadraticError);
QFRAMES_DEFINE_ERROR(DimensionError);
QFRAMES_DEFINE_ERROR(PacketTooWideError);
QFRAMES_DEFINE_ERROR(NonSeparableError);
QFRAMES_DEFINE_ERROR(BoundaryBreachError);
QFRAMES_DEFINE_ERROR(GridMismatchError);
QFRAMES_DEFINE_ERROR(InsufficientSamplesError);
QFRAMES_DEFINE_ERROR(ConfigError);

#undef QFRAMES_DEFINE_ERROR

}  // namespace qframes
