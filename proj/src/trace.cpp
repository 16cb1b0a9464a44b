#include "sttsim/trace.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sttsim/errors.hpp"

namespace sttsim {

namespace {

bool has_gz_suffix(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
    throw TraceError(source + ":" + std::to_string(line) + ": " + msg, line);
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::int64_t parse_timestamp(const std::string& tok, const std::string& source,
                             std::size_t line) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        fail(source, line, "bad timestamp '" + tok + "' (expected nonnegative integer ns)");
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (errno == ERANGE || end != tok.c_str() + tok.size())
        fail(source, line, "timestamp '" + tok + "' out of range");
    return v;
}

std::uint64_t parse_address(const std::string& tok, const std::string& source,
                            std::size_t line) {
    std::string body = tok;
    if (body.size() > 2 && (body.compare(0, 2, "0x") == 0 || body.compare(0, 2, "0X") == 0))
        body = body.substr(2);
    if (body.empty()) fail(source, line, "bad address '" + tok + "'");
    std::uint64_t v = 0;
    for (char c : body) {
        const int h = hex_value(c);
        if (h < 0) fail(source, line, "bad address '" + tok + "' (expected hex)");
        if (v >> 60) fail(source, line, "address '" + tok + "' out of range");
        v = (v << 4) | static_cast<std::uint64_t>(h);
    }
    return v;
}

BlockData parse_payload(const std::string& tok, std::uint32_t block_bytes,
                        const std::string& source, std::size_t line) {
    if (tok.size() != 2 * static_cast<std::size_t>(block_bytes)) {
        fail(source, line,
             "payload has " + std::to_string(tok.size()) + " hex digits, expected " +
                 std::to_string(2 * block_bytes) + " (" + std::to_string(block_bytes) +
                 " bytes)");
    }
    BlockData data(block_bytes);
    for (std::uint32_t i = 0; i < block_bytes; ++i) {
        const int hi = hex_value(tok[2 * i]);
        const int lo = hex_value(tok[2 * i + 1]);
        if (hi < 0 || lo < 0) fail(source, line, "payload contains non-hex characters");
        data[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return data;
}

std::string read_gz_file(const std::string& path) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (gz == nullptr) throw TraceError("cannot open trace file: " + path, 0);
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(gz, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
    if (n < 0) {
        int errnum = 0;
        const char* msg = gzerror(gz, &errnum);
        std::string err = msg != nullptr ? msg : "gzip read error";
        gzclose(gz);
        throw TraceError("error reading " + path + ": " + err, 0);
    }
    gzclose(gz);
    return out;
}

} // namespace

std::vector<AccessRecord> parse_trace(std::istream& in, std::uint32_t block_bytes,
                                      const std::string& source_name) {
    std::vector<AccessRecord> out;
    std::string line;
    std::size_t lineno = 0;
    std::size_t prev_line = 0;
    std::int64_t prev_ts = -1;

    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);

        std::istringstream fields(line);
        std::string ts_tok;
        if (!(fields >> ts_tok)) continue; // blank or comment-only line

        std::string kind_tok, addr_tok;
        if (!(fields >> kind_tok >> addr_tok))
            fail(source_name, lineno, "incomplete record (need <ts> <R|W> <address>)");

        AccessRecord rec;
        rec.timestamp_ns = parse_timestamp(ts_tok, source_name, lineno);
        if (kind_tok == "R") {
            rec.kind = AccessKind::Read;
        } else if (kind_tok == "W") {
            rec.kind = AccessKind::Write;
        } else {
            fail(source_name, lineno, "bad access kind '" + kind_tok + "' (expected R or W)");
        }
        rec.address = parse_address(addr_tok, source_name, lineno);

        std::string data_tok;
        const bool have_data = static_cast<bool>(fields >> data_tok);
        if (rec.kind == AccessKind::Write) {
            if (!have_data)
                fail(source_name, lineno, "write record is missing its data payload");
            rec.data = parse_payload(data_tok, block_bytes, source_name, lineno);
        } else if (have_data) {
            fail(source_name, lineno, "read record carries unexpected data field");
        }
        std::string extra;
        if (fields >> extra) fail(source_name, lineno, "unexpected trailing field '" + extra + "'");

        if (prev_ts >= 0 && rec.timestamp_ns < prev_ts) {
            fail(source_name, lineno,
                 "timestamp " + std::to_string(rec.timestamp_ns) + " precedes timestamp " +
                     std::to_string(prev_ts) + " on line " + std::to_string(prev_line));
        }
        prev_ts = rec.timestamp_ns;
        prev_line = lineno;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<AccessRecord> load_trace(const std::string& path, std::uint32_t block_bytes) {
    if (has_gz_suffix(path)) {
        std::istringstream in(read_gz_file(path));
        return parse_trace(in, block_bytes, path);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError("cannot open trace file: " + path, 0);
    return parse_trace(in, block_bytes, path);
}

std::string serialize_trace(std::span<const AccessRecord> records) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (const auto& rec : records) {
        if (rec.kind != AccessKind::Read && rec.kind != AccessKind::Write)
            throw InvalidParameter("trace format carries only R and W records");
        out += std::to_string(rec.timestamp_ns);
        out += rec.kind == AccessKind::Read ? " R 0x" : " W 0x";
        char addr[17];
        std::size_t pos = 16;
        std::uint64_t a = rec.address;
        addr[16] = '\0';
        do {
            addr[--pos] = hex[a & 0xf];
            a >>= 4;
        } while (a != 0);
        out += &addr[pos];
        if (rec.kind == AccessKind::Write) {
            out += ' ';
            for (std::uint8_t b : rec.data) {
                out += hex[b >> 4];
                out += hex[b & 0xf];
            }
        }
        out += '\n';
    }
    return out;
}

void save_trace(const std::string& path, std::span<const AccessRecord> records) {
    const std::string text = serialize_trace(records);
    if (has_gz_suffix(path)) {
        gzFile gz = gzopen(path.c_str(), "wb9");
        if (gz == nullptr) throw TraceError("cannot open trace file for writing: " + path, 0);
        std::size_t off = 0;
        while (off < text.size()) {
            const auto chunk = static_cast<unsigned>(std::min<std::size_t>(
                text.size() - off, 1u << 30));
            const int written = gzwrite(gz, text.data() + off, chunk);
            if (written <= 0) {
                gzclose(gz);
                throw TraceError("gzip write error on " + path, 0);
            }
            off += static_cast<std::size_t>(written);
        }
        gzclose(gz);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TraceError("cannot open trace file for writing: " + path, 0);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw TraceError("write error on " + path, 0);
}

} // namespace sttsim
