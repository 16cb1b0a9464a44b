#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sttsim/cache.hpp"

// Trace ingest and serialization.
//
// Text format, one record per line:
//   <timestamp_ns> <R|W> <address_hex> [<data_hex>]
// Timestamps are nonnegative integer nanoseconds and must be nondecreasing.
// Addresses are hex with optional 0x prefix. Writes carry a payload of
// exactly the block size, two hex digits per byte; reads carry none.
// `#` starts a comment (full-line or trailing); blank lines are ignored.
// Files ending in .gz are gzip-compressed.

namespace sttsim {

/// Parses records from a stream. `source_name` only decorates error
/// messages. Throws TraceError with a 1-based line number on malformed
/// input; a timestamp regression names both offending lines.
std::vector<AccessRecord> parse_trace(std::istream& in, std::uint32_t block_bytes,
                                      const std::string& source_name = "<stream>");

/// Loads a trace file, transparently gunzipping *.gz.
std::vector<AccessRecord> load_trace(const std::string& path, std::uint32_t block_bytes);

/// Renders records in the exact form parse_trace accepts;
/// parse(serialize(r)) round-trips to identical records.
std::string serialize_trace(std::span<const AccessRecord> records);

/// Writes a trace file, gzipping when the path ends in .gz.
void save_trace(const std::string& path, std::span<const AccessRecord> records);

} // namespace sttsim
