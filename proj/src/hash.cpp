// SPDX-License-Identifier: Apache-2.0

#include "dao2/hash.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <stdexcept>

namespace dao2 {

Digest32 sha256(ByteView data) {
  Digest32 out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Digest64 hmac_sha512(ByteView key, ByteView message) {
  Digest64 out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha512(), key.data(), static_cast<int>(key.size()), message.data(), message.size(),
           out.data(), &len) == nullptr ||
      len != out.size()) {
    throw std::runtime_error("HMAC-SHA512 failed");
  }
  return out;
}

void secure_wipe(std::span<std::uint8_t> buf) { OPENSSL_cleanse(buf.data(), buf.size()); }

}  // namespace dao2
