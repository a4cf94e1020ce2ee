#pragma once

#include <map>
#include <string>

#include "tlf/operators.hpp"
#include "tlf/tensor.hpp"
#include "tlf/trace.hpp"

namespace tlf {

// Images. PGM (P5) / PPM (P6) are 8-bit with values mapped to [0,1] by /255;
// writing clamps to [0,1] and rounds. TLFT is lossless:
//   "TLFT" | u32 H | u32 W | u32 C | H*W*C f64 payload (little-endian,
//   channel planes, row-major).
// All readers throw IoError on missing files and malformed content.
ImageTensor read_image(const std::string& path);  // dispatches on the magic
ImageTensor read_pnm(const std::string& path);
void write_pnm(const std::string& path, const ImageTensor& x);  // P5 for C = 1, P6 for C = 3
ImageTensor read_tlft(const std::string& path);
void write_tlft(const std::string& path, const ImageTensor& x);

// Kernel text file: first line "kh kw", then kh*kw taps in row-major order.
// Taps are used as given (no renormalization); kernels must be odd-sized.
BlurKernel read_kernel(const std::string& path);
void write_kernel(const std::string& path, const BlurKernel& k);

// Mask PGM: 0 = missing, 255 = observed; any other level is rejected with
// ValidationError. Returned tensor holds 0/1.
ImageTensor read_mask(const std::string& path);
void write_mask(const std::string& path, const ImageTensor& mask);

// Trace CSV with header
//   k,F,rel_err,norm_xF_x,norm_xG_x,norm_xGmu_x,alpha,mu,mdus_branch,bus_branch,psnr
// Reals use %.17g; an absent psnr is an empty field.
extern const char* const kTraceHeader;
std::string format_trace_csv(const IterateTrace& trace);
void write_trace_csv(const std::string& path, const IterateTrace& trace);
std::vector<TraceRecord> parse_trace_csv(const std::string& text);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

// Flat "key = value" text; '#' starts a comment, blank lines are skipped.
// Keys are normalized to use '_' instead of '-'. Throws ConfigError on a line
// without '=' or a repeated key.
std::map<std::string, std::string> parse_key_values(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace tlf
