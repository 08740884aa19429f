#pragma once

#include <stdexcept>
#include <string>

namespace cva {

// All library failures derive from Error so callers can catch them as a group.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CVA_DEFINE_ERROR(Name)                   \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

CVA_DEFINE_ERROR(MalformedCurve);
CVA_DEFINE_ERROR(MalformedInput);
CVA_DEFINE_ERROR(MissingFile);
CVA_DEFINE_ERROR(OutOfRange);
CVA_DEFINE_ERROR(InvalidTenor);
CVA_DEFINE_ERROR(NumericalFailure);
CVA_DEFINE_ERROR(BootstrapFailure);
CVA_DEFINE_ERROR(InfeasibleCorrelation);
CVA_DEFINE_ERROR(InvalidState);
CVA_DEFINE_ERROR(CorruptPath);
CVA_DEFINE_ERROR(ConfigMismatch);
CVA_DEFINE_ERROR(DegenerateSchedule);

#undef CVA_DEFINE_ERROR

}  // namespace cva
