#pragma once

// Signal and spectrum files. Signals: CSV with a "re,im" header, or raw
// little-endian float64 (re, im) pairs. Outputs are CSV with %.17g numbers so
// identical inputs give identical bytes.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hfp/config.hpp"
#include "hfp/error.hpp"
#include "hfp/pipeline.hpp"
#include "hfp/spectral.hpp"

namespace hfp {

enum class SignalFormat { Csv, Raw64 };

inline SignalFormat parse_signal_format(std::string_view text) {
    if (text == "csv") return SignalFormat::Csv;
    if (text == "raw64") return SignalFormat::Raw64;
    throw Error(ErrorCode::ParseError, "format must be csv or raw64, got '" + std::string(text) + "'");
}

inline std::vector<cd> read_signal_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<cd> out;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        if (!header) {
            if (body != "re,im") throw Error(ErrorCode::ParseError, "signal CSV must start with the header re,im");
            header = true;
            continue;
        }
        const auto comma = body.find(',');
        if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected two fields re,im");
        }
        const std::string ctx = "line " + std::to_string(line_no) + ": ";
        out.emplace_back(parse_double(body.substr(0, comma), ctx), parse_double(body.substr(comma + 1), ctx));
    }
    if (!header) throw Error(ErrorCode::ParseError, "empty signal file");
    return out;
}

namespace detail {

inline double load_le_double(const unsigned char* p) noexcept {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
    return std::bit_cast<double>(bits);
}

inline void store_le_double(double v, unsigned char* p) noexcept {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
        p[b] = static_cast<unsigned char>(bits & 0xffu);
        bits >>= 8;
    }
}

} // namespace detail

inline std::vector<cd> read_signal_raw64(std::istream& in) {
    const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() % 16 != 0) throw Error(ErrorCode::ParseError, "raw64 size is not a multiple of 16 bytes");
    std::vector<cd> out(bytes.size() / 16);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double re = detail::load_le_double(&bytes[16 * i]);
        const double im = detail::load_le_double(&bytes[16 * i + 8]);
        if (!std::isfinite(re) || !std::isfinite(im)) throw Error(ErrorCode::ParseError, "non-finite sample " + std::to_string(i));
        out[i] = {re, im};
    }
    return out;
}

inline ComplexSignal read_signal(const std::string& path, double rate_hz, SignalFormat fmt) {
    if (!(rate_hz > 0.0)) throw Error(ErrorCode::ConfigError, "rate must be positive");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    ComplexSignal x{fmt == SignalFormat::Csv ? read_signal_csv(in) : read_signal_raw64(in), rate_hz, 0};
    if (x.samples.empty()) throw Error(ErrorCode::BadShape, path + " holds no samples");
    return x;
}

inline void write_signal_csv(std::ostream& os, const ComplexSignal& x) {
    os << "re,im\n";
    for (const auto& v : x.samples) os << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
}

inline void write_signal_raw64(std::ostream& os, const ComplexSignal& x) {
    std::vector<unsigned char> bytes(16 * x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        detail::store_le_double(x.samples[i].real(), &bytes[16 * i]);
        detail::store_le_double(x.samples[i].imag(), &bytes[16 * i + 8]);
    }
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void write_spectrum_csv(std::ostream& os, const Spectrum& X) {
    os << "bin_index,freq_hz,re,im,magnitude\n";
    for (std::size_t j = 0; j < X.size(); ++j) {
        os << j << ',' << format_double(static_cast<double>(j) * X.bin_hz) << ',' << format_double(X.bins[j].real()) << ','
           << format_double(X.bins[j].imag()) << ',' << format_double(std::abs(X.bins[j])) << '\n';
    }
}

/// One row per component; amplitude_* columns are full-spectrum scale.
inline void write_components_csv(std::ostream& os, const SparseSpectrum& sp) {
    os << "freq_hz,re,im,magnitude,source_bin,collision_order,match_distance_hz,residual\n";
    for (const auto& c : sp.components) {
        os << format_double(c.freq_hz) << ',' << format_double(c.amplitude.real()) << ',' << format_double(c.amplitude.imag()) << ','
           << format_double(std::abs(c.amplitude)) << ',' << c.source_bin << ',' << c.collision_order << ','
           << format_double(c.match_distance_hz) << ',' << format_double(c.residual) << '\n';
    }
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw Error(ErrorCode::ParseError, "cannot write " + path);
    writer(os);
    if (!os) throw Error(ErrorCode::ParseError, "write failed for " + path);
}

} // namespace hfp
