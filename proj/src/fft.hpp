#pragma once

// Thin wrapper around FFTW real-to-complex 2-D transforms of one image plane.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tlf::detail {

using Complex = std::complex<double>;

class Fft2d {
public:
    Fft2d(std::size_t height, std::size_t width);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    // Number of stored frequencies: height x (width/2 + 1).
    std::size_t spectrum_size() const noexcept { return height_ * (width_ / 2 + 1); }
    std::size_t half_width() const noexcept { return width_ / 2 + 1; }

    void forward(std::span<const double> plane, std::span<Complex> spectrum) const;
    // Normalized inverse; `spectrum` is taken by value because c2r clobbers it.
    void inverse(std::vector<Complex> spectrum, std::span<double> plane) const;

    std::vector<Complex> forward(std::span<const double> plane) const {
        std::vector<Complex> out(spectrum_size());
        forward(plane, out);
        return out;
    }

private:
    std::size_t height_;
    std::size_t width_;
    void* forward_plan_;
    void* inverse_plan_;
};

}  // namespace tlf::detail
