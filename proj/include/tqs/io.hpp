#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tqs/image.hpp"

namespace tqs {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path + ": cannot open file for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path + ": write failed");
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t offset, const std::string& what) {
    throw IoError(path + ": byte " + std::to_string(offset) + ": " + what);
}

// Token scanner for the PGM header: skips whitespace and '#' comments.
struct PgmScanner {
    const std::string& buf;
    const std::string& path;
    std::size_t pos = 0;

    void skip_space() {
        while (pos < buf.size()) {
            char c = buf[pos];
            if (c == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
                ++pos;
            } else {
                break;
            }
        }
    }

    long next_int(const std::string& name) {
        skip_space();
        std::size_t start = pos;
        long v = 0;
        while (pos < buf.size() && buf[pos] >= '0' && buf[pos] <= '9') {
            v = v * 10 + (buf[pos] - '0');
            if (v > 1000000000L) parse_fail(path, start, name + " out of range");
            ++pos;
        }
        if (pos == start) parse_fail(path, start, "expected " + name);
        return v;
    }
};

}  // namespace detail

// Binary PGM (P5), maxval 255 or 65535 (16-bit samples big-endian).
template <class Img>
Img load_pgm(const std::string& path) {
    const std::string buf = detail::read_file(path);
    if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5')
        detail::parse_fail(path, 0, "not a P5 PGM file");
    detail::PgmScanner sc{buf, path, 2};
    const long w = sc.next_int("width");
    const long h = sc.next_int("height");
    const std::size_t maxval_at = (sc.skip_space(), sc.pos);
    const long maxval = sc.next_int("maxval");
    if (w <= 0 || h <= 0) detail::parse_fail(path, 2, "bad dimensions");
    if (maxval != 255 && maxval != 65535)
        detail::parse_fail(path, maxval_at, "unsupported maxval " + std::to_string(maxval));
    if (sc.pos >= buf.size()) detail::parse_fail(path, sc.pos, "missing payload");
    ++sc.pos;  // single whitespace byte after maxval
    const std::size_t npix = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const std::size_t bytes = npix * (maxval == 255 ? 1 : 2);
    if (buf.size() - sc.pos < bytes)
        detail::parse_fail(path, buf.size(), "truncated payload, need " + std::to_string(bytes) + " bytes");

    Img img(static_cast<int>(w), static_cast<int>(h));
    const unsigned char* p = reinterpret_cast<const unsigned char*>(buf.data()) + sc.pos;
    if (maxval == 255) {
        for (std::size_t i = 0; i < npix; ++i) img.samples[i] = p[i] / 255.0;
    } else {
        for (std::size_t i = 0; i < npix; ++i) {
            unsigned v = (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
            img.samples[i] = v / 65535.0;
        }
    }
    return img;
}

// Deterministic encoding; rounding is round-half-away-from-zero after
// clamping to [0,1].
template <class Img>
void save_pgm(const Img& img, const std::string& path, int maxval = 255) {
    if (maxval != 255 && maxval != 65535)
        throw std::invalid_argument("save_pgm: maxval must be 255 or 65535");
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument("save_pgm: empty image");
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n" + std::to_string(maxval) + "\n";
    out.reserve(out.size() + img.samples.size() * (maxval == 255 ? 1 : 2));
    for (double s : img.samples) {
        double v = s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
        long q = std::llround(v * maxval);
        if (maxval == 255) {
            out.push_back(static_cast<char>(q));
        } else {
            out.push_back(static_cast<char>((q >> 8) & 0xFF));
            out.push_back(static_cast<char>(q & 0xFF));
        }
    }
    detail::write_file(path, out);
}

// NSP1 pattern file: magic "NSP1\n", ASCII "width height meaning\n"
// (meaning D or K), then width*height raw code bytes row-major.
inline void save_pattern(const QuadrantPattern& pat, const std::string& path) {
    if (pat.width <= 0 || pat.height <= 0)
        throw std::invalid_argument("save_pattern: empty pattern");
    for (std::uint8_t c : pat.codes)
        if (c >= 4) throw std::invalid_argument("save_pattern: invalid quadrant code");
    std::string out = "NSP1\n" + std::to_string(pat.width) + " " + std::to_string(pat.height) +
                      " " + meaning_char(pat.meaning) + "\n";
    out.append(reinterpret_cast<const char*>(pat.codes.data()), pat.codes.size());
    detail::write_file(path, out);
}

inline QuadrantPattern load_pattern(const std::string& path) {
    const std::string buf = detail::read_file(path);
    if (buf.size() < 5 || buf.compare(0, 5, "NSP1\n") != 0)
        detail::parse_fail(path, 0, "bad magic, expected NSP1");
    std::size_t eol = buf.find('\n', 5);
    if (eol == std::string::npos) detail::parse_fail(path, buf.size(), "missing header line");
    std::istringstream hdr(buf.substr(5, eol - 5));
    long w = 0, h = 0;
    char m = 0;
    if (!(hdr >> w >> h >> m) || w <= 0 || h <= 0)
        detail::parse_fail(path, 5, "malformed header line");
    if (m != 'D' && m != 'K') detail::parse_fail(path, 5, "meaning must be D or K");
    const std::size_t npix = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const std::size_t payload = eol + 1;
    if (buf.size() - payload < npix)
        detail::parse_fail(path, buf.size(), "truncated pattern, need " + std::to_string(npix) + " codes");
    QuadrantPattern pat(static_cast<int>(w), static_cast<int>(h),
                        m == 'D' ? PatternMeaning::Discarded : PatternMeaning::Kept);
    for (std::size_t i = 0; i < npix; ++i) {
        unsigned char c = static_cast<unsigned char>(buf[payload + i]);
        if (c >= 4) detail::parse_fail(path, payload + i, "invalid quadrant code " + std::to_string(c));
        pat.codes[i] = c;
    }
    return pat;
}

}  // namespace tqs
