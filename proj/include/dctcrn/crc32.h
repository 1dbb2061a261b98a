#pragma once

#include <cstddef>
#include <cstdint>

namespace dctcrn {

// IEEE 802.3 CRC-32 (reflected, polynomial 0xEDB88320), the same checksum
// zip and png use. Covers a whole buffer in one call.
uint32_t crc32_ieee(const uint8_t* data, size_t n);

}  // namespace dctcrn
