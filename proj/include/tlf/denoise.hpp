#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlf/tensor.hpp"

namespace tlf {

enum class DenoiserKind { tv_rof, recursive_filter, gaussian, median, wavelet_shrink, external };

std::string to_string(DenoiserKind k);

// Plug-in image prior x_tilde = N(x; k). `strength` is interpreted per kind:
//   tv-rof           TV weight of the ROF model
//   recursive-filter range sigma of the edge-aware recursive filter
//   gaussian         spatial sigma in pixels
//   median           window radius (rounded, at least 1)
//   wavelet-shrink   soft threshold on Haar coefficients
//   external         forwarded to the child process as the hint
// A nonempty `schedule` overrides `strength` per outer iteration (clamped to
// its last entry).
struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::tv_rof;
    double strength = 0.0;
    std::vector<double> schedule;
    std::vector<std::string> command;  // external only: argv
    double timeout_seconds = 30.0;

    double strength_at(int iter_index) const;
    void validate() const;
};

// Parses "kind:strength" or "kind:s0,s1,s2" (schedule), e.g. "tv-rof:0.05".
DenoiserSpec parse_denoiser(const std::string& text);
// Builds an external spec from a whitespace-separated command line.
DenoiserSpec external_denoiser(const std::string& command_line, double strength = 1.0);
std::string describe(const DenoiserSpec& spec);

ImageTensor denoise(const DenoiserSpec& spec, const ImageTensor& x, int iter_index);

// Individual designed denoisers, exposed for tests and reuse.
ImageTensor tv_rof_denoise(const ImageTensor& x, double weight, int iters = 10);
ImageTensor recursive_filter(const ImageTensor& x, double sigma_r, double sigma_s = 5.0, int passes = 3);
ImageTensor gaussian_smooth(const ImageTensor& x, double sigma);
ImageTensor median_filter(const ImageTensor& x, int radius);
ImageTensor wavelet_shrink(const ImageTensor& x, double threshold, int levels = 3);

// Denoiser wire protocol, little-endian:
//   request = "TLF1" | u32 H | u32 W | u32 C | f32 hint | H*W*C f32 payload
//   reply   = "TLF1" | u32 H | u32 W | u32 C | H*W*C f32 payload
// Payload order matches ImageTensor storage (channel planes, row-major).
namespace wire {

std::vector<std::uint8_t> encode_request(const ImageTensor& x, float hint);
std::vector<std::uint8_t> encode_reply(const ImageTensor& x);

struct Request {
    ImageTensor image;
    float hint = 0.0f;
};
// Both throw DenoiserError on malformed input.
Request decode_request(const std::vector<std::uint8_t>& bytes);
ImageTensor decode_reply(const std::vector<std::uint8_t>& bytes);

}  // namespace wire

// Runs `command` once: writes the request to its stdin, reads the reply from
// its stdout. Throws DenoiserError on timeout, non-zero exit, malformed reply
// or a reply whose shape differs from x.
ImageTensor external_roundtrip(const std::vector<std::string>& command, const ImageTensor& x, double hint,
                               double timeout_seconds = 30.0);

}  // namespace tlf
