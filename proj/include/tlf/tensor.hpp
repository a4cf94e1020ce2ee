#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tlf {

struct Shape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;

    std::size_t plane() const noexcept { return height * width; }
    std::size_t size() const noexcept { return height * width * channels; }

    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

// Dense H x W x C real image, row-major within a channel, channels stored as
// consecutive planes. Values are nominally in [0,1] for images and unbounded
// for coefficients and intermediates.
class ImageTensor {
public:
    ImageTensor() = default;
    explicit ImageTensor(Shape shape, double fill = 0.0);
    ImageTensor(Shape shape, std::vector<double> data);

    static ImageTensor constant(Shape shape, double value) { return ImageTensor(shape, value); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t height() const noexcept { return shape_.height; }
    std::size_t width() const noexcept { return shape_.width; }
    std::size_t channels() const noexcept { return shape_.channels; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(std::size_t row, std::size_t col, std::size_t ch = 0) {
        return data_[ch * shape_.plane() + row * shape_.width + col];
    }
    double at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
        return data_[ch * shape_.plane() + row * shape_.width + col];
    }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    std::span<double> channel(std::size_t ch) {
        return std::span<double>(data_).subspan(ch * shape_.plane(), shape_.plane());
    }
    std::span<const double> channel(std::size_t ch) const {
        return std::span<const double>(data_).subspan(ch * shape_.plane(), shape_.plane());
    }

    bool all_finite() const noexcept;

    ImageTensor& operator+=(const ImageTensor& o);
    ImageTensor& operator-=(const ImageTensor& o);
    ImageTensor& operator*=(double s);

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

private:
    Shape shape_{};
    std::vector<double> data_;
};

ImageTensor operator+(ImageTensor a, const ImageTensor& b);
ImageTensor operator-(ImageTensor a, const ImageTensor& b);
ImageTensor operator*(double s, ImageTensor a);

// Throws ShapeError with `what` as context when the shapes differ.
void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what);

double dot(const ImageTensor& a, const ImageTensor& b);
double norm(const ImageTensor& a);
double distance(const ImageTensor& a, const ImageTensor& b);
double sum_abs(const ImageTensor& a);

// a * x + b * y, elementwise.
ImageTensor lincomb(double a, const ImageTensor& x, double b, const ImageTensor& y);

}  // namespace tlf
