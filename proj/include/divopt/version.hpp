#pragma once

namespace divopt {

inline const char* version() { return "0.1.0"; }

} // namespace divopt
