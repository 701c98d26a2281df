#ifndef LSAR_ERROR_HPP
#define LSAR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lsar {

/// Base class for every error raised by the library. `kind()` is the stable
/// machine-readable name used in CLI error records.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
};

#define LSAR_DEFINE_ERROR(Name)                                         \
    class Name : public Error {                                         \
    public:                                                             \
        using Error::Error;                                             \
        const char* kind() const noexcept override { return #Name; }    \
    }

LSAR_DEFINE_ERROR(FormatError);
LSAR_DEFINE_ERROR(DataError);
LSAR_DEFINE_ERROR(IoError);
LSAR_DEFINE_ERROR(ArgumentError);
LSAR_DEFINE_ERROR(DegenerateInputError);
LSAR_DEFINE_ERROR(LanguageError);
LSAR_DEFINE_ERROR(GenerationError);

#undef LSAR_DEFINE_ERROR

}  // namespace lsar

#endif
