#include "tlf/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "tlf/errors.hpp"

namespace tlf {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

std::string read_bytes(const std::string& path) { return read_text_file(path); }

// Cursor over a PNM header: whitespace and '#' comments between tokens.
struct PnmHeader {
    const std::string& data;
    std::size_t pos = 2;

    long next_int(const std::string& path) {
        while (pos < data.size()) {
            if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
        if (start == pos) throw IoError("malformed PNM header in '" + path + "'");
        return std::stol(data.substr(start, pos - start));
    }
};

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const std::string& in, std::size_t off, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + static_cast<std::size_t>(i)])) << (8 * i);
    return v;
}

}  // namespace

ImageTensor read_pnm(const std::string& path) {
    const std::string data = read_bytes(path);
    if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '6'))
        throw IoError("'" + path + "' is not a binary PGM/PPM file");
    const std::size_t C = data[1] == '5' ? 1 : 3;
    PnmHeader h{data};
    const long W = h.next_int(path), H = h.next_int(path), maxval = h.next_int(path);
    if (W <= 0 || H <= 0) throw IoError("'" + path + "' has zero dimensions");
    if (maxval != 255) throw IoError("'" + path + "' is not 8-bit (maxval " + std::to_string(maxval) + ")");
    if (h.pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[h.pos])))
        throw IoError("malformed PNM header in '" + path + "'");
    const std::size_t start = h.pos + 1;
    const Shape s{static_cast<std::size_t>(H), static_cast<std::size_t>(W), C};
    if (data.size() - start < s.size()) throw IoError("'" + path + "' is truncated");

    ImageTensor x(s);
    for (std::size_t i = 0; i < s.height; ++i)
        for (std::size_t j = 0; j < s.width; ++j)
            for (std::size_t c = 0; c < C; ++c)
                x.at(i, j, c) = static_cast<unsigned char>(data[start + (i * s.width + j) * C + c]) / 255.0;
    return x;
}

void write_pnm(const std::string& path, const ImageTensor& x) {
    const std::size_t C = x.channels();
    if (C != 1 && C != 3) throw ShapeError("PNM output needs 1 or 3 channels, got " + std::to_string(C));
    std::string out = (C == 1 ? "P5\n" : "P6\n") + std::to_string(x.width()) + " " + std::to_string(x.height()) +
                      "\n255\n";
    for (std::size_t i = 0; i < x.height(); ++i)
        for (std::size_t j = 0; j < x.width(); ++j)
            for (std::size_t c = 0; c < C; ++c) out.push_back(static_cast<char>(to_byte(x.at(i, j, c))));
    write_text_file(path, out);
}

ImageTensor read_tlft(const std::string& path) {
    const std::string data = read_bytes(path);
    if (data.size() < 16 || data.compare(0, 4, "TLFT") != 0) throw IoError("'" + path + "' is not a TLFT file");
    const Shape s{get_le(data, 4, 4), get_le(data, 8, 4), get_le(data, 12, 4)};
    if (s.size() == 0) throw IoError("'" + path + "' has zero dimensions");
    if (data.size() != 16 + 8 * s.size())
        throw IoError("'" + path + "' payload does not match dimensions " + to_string(s));
    ImageTensor x(s);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::bit_cast<double>(get_le(data, 16 + 8 * i, 8));
    return x;
}

void write_tlft(const std::string& path, const ImageTensor& x) {
    std::string out = "TLFT";
    put_u32(out, static_cast<std::uint32_t>(x.height()));
    put_u32(out, static_cast<std::uint32_t>(x.width()));
    put_u32(out, static_cast<std::uint32_t>(x.channels()));
    for (double v : x.values()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
    write_text_file(path, out);
}

ImageTensor read_image(const std::string& path) {
    const std::string data = read_bytes(path);
    if (data.size() >= 4 && data.compare(0, 4, "TLFT") == 0) return read_tlft(path);
    if (data.size() >= 2 && data[0] == 'P' && (data[1] == '5' || data[1] == '6')) return read_pnm(path);
    throw IoError("'" + path + "' is neither PGM/PPM nor TLFT");
}

BlurKernel read_kernel(const std::string& path) {
    std::istringstream in(read_text_file(path));
    long kh = 0, kw = 0;
    if (!(in >> kh >> kw) || kh <= 0 || kw <= 0) throw IoError("'" + path + "': bad kernel header");
    std::vector<double> taps(static_cast<std::size_t>(kh * kw));
    for (double& t : taps)
        if (!(in >> t)) throw IoError("'" + path + "': expected " + std::to_string(kh * kw) + " taps");
    std::string extra;
    if (in >> extra) throw IoError("'" + path + "': trailing data after kernel taps");
    return BlurKernel(static_cast<std::size_t>(kh), static_cast<std::size_t>(kw), std::move(taps), false);
}

void write_kernel(const std::string& path, const BlurKernel& k) {
    std::string out = std::to_string(k.rows()) + " " + std::to_string(k.cols()) + "\n";
    char buf[32];
    for (std::size_t r = 0; r < k.rows(); ++r) {
        for (std::size_t c = 0; c < k.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", k.tap(r, c));
            out += (c ? " " : "") + std::string(buf);
        }
        out += "\n";
    }
    write_text_file(path, out);
}

ImageTensor read_mask(const std::string& path) {
    ImageTensor m = read_pnm(path);
    for (double& v : m.values()) {
        if (v == 0.0) continue;
        if (v == 1.0) continue;
        throw ValidationError("mask '" + path + "' has levels other than 0 and 255");
    }
    return m;
}

void write_mask(const std::string& path, const ImageTensor& mask) {
    for (double v : mask.values())
        if (v != 0.0 && v != 1.0) throw ValidationError("mask entries must be exactly 0 or 1");
    write_pnm(path, mask);
}

// ---------------------------------------------------------------------------
// Traces

const char* const kTraceHeader = "k,F,rel_err,norm_xF_x,norm_xG_x,norm_xGmu_x,alpha,mu,mdus_branch,bus_branch,psnr";

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::logic_error&) {
        throw IoError("bad number '" + s + "' in trace CSV");
    }
    if (used != s.size()) throw IoError("bad number '" + s + "' in trace CSV");
    return v;
}

}  // namespace

std::string format_trace_csv(const IterateTrace& trace) {
    std::string out = std::string(kTraceHeader) + "\n";
    for (const auto& r : trace.records) {
        out += std::to_string(r.k) + ',' + fmt(r.F) + ',' + fmt(r.rel_err) + ',' + fmt(r.norm_xF_x) + ',' +
               fmt(r.norm_xG_x) + ',' + fmt(r.norm_xGmu_x) + ',' + fmt(r.alpha) + ',' + fmt(r.mu) + ',' +
               to_string(r.mdus_branch) + ',' + to_string(r.bus_branch) + ',' + (r.psnr ? fmt(*r.psnr) : "") + '\n';
    }
    return out;
}

void write_trace_csv(const std::string& path, const IterateTrace& trace) {
    write_text_file(path, format_trace_csv(trace));
}

std::vector<TraceRecord> parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) throw IoError("trace CSV header mismatch");
    std::vector<TraceRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() != 11) throw IoError("trace CSV row has " + std::to_string(f.size()) + " fields");
        TraceRecord r;
        r.k = static_cast<int>(parse_real(f[0]));
        r.F = parse_real(f[1]);
        r.rel_err = parse_real(f[2]);
        r.norm_xF_x = parse_real(f[3]);
        r.norm_xG_x = parse_real(f[4]);
        r.norm_xGmu_x = parse_real(f[5]);
        r.alpha = parse_real(f[6]);
        r.mu = parse_real(f[7]);
        try {
            r.mdus_branch = parse_mdus_branch(f[8]);
            r.bus_branch = parse_bus_branch(f[9]);
        } catch (const Error& e) {
            throw IoError(std::string("trace CSV: ") + e.what());
        }
        if (!f[10].empty()) r.psnr = parse_real(f[10]);
        out.push_back(r);
    }
    return out;
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) { return parse_trace_csv(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Config

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '-', '_');
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
            throw ConfigError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
    return kv;
}

}  // namespace tlf
