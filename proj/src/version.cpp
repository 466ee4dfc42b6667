#include "psaug/version.hpp"

#ifndef PSAUG_VERSION_STRING
#error "PSAUG_VERSION_STRING must be defined by the build"
#endif

namespace psaug {

const char* version() noexcept { return PSAUG_VERSION_STRING; }

}  // namespace psaug
