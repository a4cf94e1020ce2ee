#include "tlf/tensor.hpp"

#include <cmath>

#include "tlf/errors.hpp"

namespace tlf {

std::string to_string(const Shape& s) {
    return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

ImageTensor::ImageTensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
    if (shape.height == 0 || shape.width == 0 || shape.channels == 0)
        throw ShapeError("image dimensions must be positive, got " + to_string(shape));
}

ImageTensor::ImageTensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (shape.height == 0 || shape.width == 0 || shape.channels == 0)
        throw ShapeError("image dimensions must be positive, got " + to_string(shape));
    if (data_.size() != shape.size())
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match " + to_string(shape));
}

bool ImageTensor::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

ImageTensor& ImageTensor::operator+=(const ImageTensor& o) {
    require_same_shape(*this, o, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

ImageTensor& ImageTensor::operator-=(const ImageTensor& o) {
    require_same_shape(*this, o, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

ImageTensor& ImageTensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

ImageTensor operator+(ImageTensor a, const ImageTensor& b) { return a += b; }
ImageTensor operator-(ImageTensor a, const ImageTensor& b) { return a -= b; }
ImageTensor operator*(double s, ImageTensor a) { return a *= s; }

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
}

double dot(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm(const ImageTensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v * v;
    return std::sqrt(acc);
}

double distance(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a, b, "distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double sum_abs(const ImageTensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += std::abs(v);
    return acc;
}

ImageTensor lincomb(double a, const ImageTensor& x, double b, const ImageTensor& y) {
    require_same_shape(x, y, "lincomb");
    ImageTensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
    return out;
}

}  // namespace tlf
