#pragma once

// Single include point for httplib. The OpenSSL toggle changes httplib's
// class layouts, so every translation unit must see the same setting or the
// linker will mix incompatible inline definitions.
#ifdef LONGCOT_HTTPS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
