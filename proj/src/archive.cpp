#include "toonforge/archive.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <memory>

namespace toonforge {

namespace {

// 1980-01-01 00:00, the zip epoch.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

void put16(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    put16(out, v & 0xffff);
    put16(out, v >> 16);
}

std::uint32_t get16(const std::vector<std::uint8_t>& in, std::size_t at) {
    if (at + 2 > in.size()) throw ArchiveError("zip: truncated archive");
    return in[at] | (in[at + 1] << 8);
}

std::uint32_t get32(const std::vector<std::uint8_t>& in, std::size_t at) {
    return get16(in, at) | (get16(in, at + 2) << 16);
}

std::uint32_t crc_of(const std::vector<std::uint8_t>& bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
        crc = crc32(crc, bytes.data() + done, chunk);
        done += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> zip_store(const Bundle& files) {
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> central;
    for (const auto& f : files) {
        if (f.bytes.size() > 0xffffffffu || f.path.size() > 0xffff) throw ArchiveError("zip: entry too large: " + f.path);
        const auto offset = static_cast<std::uint32_t>(out.size());
        const std::uint32_t crc = crc_of(f.bytes);
        const auto size = static_cast<std::uint32_t>(f.bytes.size());
        const auto name_len = static_cast<std::uint32_t>(f.path.size());

        put32(out, 0x04034b50);
        put16(out, 20);  // version needed
        put16(out, 0);   // flags
        put16(out, 0);   // stored
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, crc);
        put32(out, size);
        put32(out, size);
        put16(out, name_len);
        put16(out, 0);
        out.insert(out.end(), f.path.begin(), f.path.end());
        out.insert(out.end(), f.bytes.begin(), f.bytes.end());

        put32(central, 0x02014b50);
        put16(central, 20);  // made by
        put16(central, 20);
        put16(central, 0);
        put16(central, 0);
        put16(central, kDosTime);
        put16(central, kDosDate);
        put32(central, crc);
        put32(central, size);
        put32(central, size);
        put16(central, name_len);
        put16(central, 0);  // extra
        put16(central, 0);  // comment
        put16(central, 0);  // disk
        put16(central, 0);  // internal attrs
        put32(central, 0);  // external attrs
        put32(central, offset);
        central.insert(central.end(), f.path.begin(), f.path.end());
    }
    if (files.size() > 0xffff || out.size() > 0xffffffffu) throw ArchiveError("zip: archive too large");
    const auto cd_offset = static_cast<std::uint32_t>(out.size());
    out.insert(out.end(), central.begin(), central.end());
    put32(out, 0x06054b50);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint32_t>(files.size()));
    put16(out, static_cast<std::uint32_t>(files.size()));
    put32(out, static_cast<std::uint32_t>(central.size()));
    put32(out, cd_offset);
    put16(out, 0);
    return out;
}

Bundle zip_read(const std::vector<std::uint8_t>& in) {
    if (in.size() < 22) throw ArchiveError("zip: truncated archive");
    std::size_t eocd = in.size() - 22;
    while (get32(in, eocd) != 0x06054b50) {
        if (eocd == 0) throw ArchiveError("zip: no end of central directory");
        --eocd;
    }
    const std::uint32_t count = get16(in, eocd + 10);
    std::size_t at = get32(in, eocd + 16);
    Bundle files;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (get32(in, at) != 0x02014b50) throw ArchiveError("zip: bad central directory entry");
        const std::uint32_t method = get16(in, at + 10);
        const std::uint32_t crc = get32(in, at + 16);
        const std::uint32_t size = get32(in, at + 20);
        const std::uint32_t name_len = get16(in, at + 28);
        const std::uint32_t extra_len = get16(in, at + 30);
        const std::uint32_t comment_len = get16(in, at + 32);
        const std::uint32_t local = get32(in, at + 42);
        if (at + 46 + name_len > in.size()) throw ArchiveError("zip: truncated archive");
        std::string name(in.begin() + static_cast<std::ptrdiff_t>(at + 46),
                         in.begin() + static_cast<std::ptrdiff_t>(at + 46 + name_len));
        if (method != 0) throw ArchiveError("zip: " + name + " is compressed; only stored entries are supported");
        if (get32(in, local) != 0x04034b50) throw ArchiveError("zip: bad local header for " + name);
        const std::size_t data = local + 30 + get16(in, local + 26) + get16(in, local + 28);
        if (data + size > in.size()) throw ArchiveError("zip: truncated data for " + name);
        BundleFile f{std::move(name), std::vector<std::uint8_t>(in.begin() + static_cast<std::ptrdiff_t>(data),
                                                                in.begin() + static_cast<std::ptrdiff_t>(data + size))};
        if (crc_of(f.bytes) != crc) throw ArchiveError("zip: CRC mismatch for " + f.path);
        files.push_back(std::move(f));
        at += 46 + name_len + extra_len + comment_len;
    }
    return files;
}

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw ArchiveError("sha256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string bundle_digest(const Bundle& bundle) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw ArchiveError("sha256 failed");
    auto feed = [&](const void* p, std::size_t n) {
        std::uint8_t len[8];
        for (int i = 0; i < 8; ++i) len[i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(n) >> (8 * i));
        EVP_DigestUpdate(ctx.get(), len, sizeof len);
        EVP_DigestUpdate(ctx.get(), p, n);
    };
    for (const auto& f : bundle) {
        feed(f.path.data(), f.path.size());
        feed(f.bytes.data(), f.bytes.size());
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::string clean;
    for (char c : text)
        if (c != ' ' && c != '\n' && c != '\r' && c != '\t') clean += c;
    if (clean.size() % 4 != 0) throw ArchiveError("base64: length is not a multiple of 4");
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const char c = clean[i];
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' ||
                        c == '/' || (c == '=' && i + 2 >= clean.size());
        if (!ok) throw ArchiveError("base64: invalid character");
    }
    std::vector<std::uint8_t> out(3 * clean.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                  static_cast<int>(clean.size()));
    if (n < 0) throw ArchiveError("base64: malformed input");
    std::size_t len = static_cast<std::size_t>(n);
    // EVP_DecodeBlock counts padding as zero bytes.
    if (!clean.empty() && clean.back() == '=') --len;
    if (clean.size() >= 2 && clean[clean.size() - 2] == '=') --len;
    out.resize(len);
    return out;
}

}  // namespace toonforge
