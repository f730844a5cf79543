// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dao2/types.hpp"

namespace dao2 {

Digest32 sha256(ByteView data);
Digest64 hmac_sha512(ByteView key, ByteView message);

// Wipes a buffer in a way the optimizer keeps.
void secure_wipe(std::span<std::uint8_t> buf);

}  // namespace dao2
