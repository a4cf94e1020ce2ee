#include "tlf/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tlf/errors.hpp"
#include "tlf/feasibility.hpp"
#include "tlf/operators.hpp"
#include "tlf/prox.hpp"

namespace tlf {

std::string to_string(DenoiserKind k) {
    switch (k) {
        case DenoiserKind::tv_rof: return "tv-rof";
        case DenoiserKind::recursive_filter: return "recursive-filter";
        case DenoiserKind::gaussian: return "gaussian";
        case DenoiserKind::median: return "median";
        case DenoiserKind::wavelet_shrink: return "wavelet-shrink";
        case DenoiserKind::external: return "external";
    }
    return "tv-rof";
}

double DenoiserSpec::strength_at(int iter_index) const {
    if (schedule.empty()) return strength;
    const std::size_t i = static_cast<std::size_t>(std::max(iter_index, 0));
    return schedule[std::min(i, schedule.size() - 1)];
}

void DenoiserSpec::validate() const {
    if (!(strength >= 0.0)) throw ConfigError("denoiser strength must be >= 0");
    for (double s : schedule)
        if (!(s >= 0.0)) throw ConfigError("denoiser schedule entries must be >= 0");
    if (kind == DenoiserKind::external && command.empty())
        throw ConfigError("external denoiser needs a command");
    if (!(timeout_seconds > 0.0)) throw ConfigError("denoiser timeout must be positive");
}

DenoiserSpec parse_denoiser(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    DenoiserSpec spec;
    if (name == "tv-rof") spec.kind = DenoiserKind::tv_rof;
    else if (name == "recursive-filter" || name == "rf") spec.kind = DenoiserKind::recursive_filter;
    else if (name == "gaussian") spec.kind = DenoiserKind::gaussian;
    else if (name == "median") spec.kind = DenoiserKind::median;
    else if (name == "wavelet-shrink") spec.kind = DenoiserKind::wavelet_shrink;
    else if (name == "external") throw ConfigError("external denoisers are given with --external-denoiser CMD");
    else throw ConfigError("unknown denoiser kind '" + name + "'");
    if (colon == std::string::npos) throw ConfigError("denoiser spec needs a strength: '" + text + "'");

    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    std::vector<double> values;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError("bad denoiser strength '" + item + "'");
        }
    }
    if (values.empty()) throw ConfigError("denoiser spec needs a strength: '" + text + "'");
    spec.strength = values.front();
    if (values.size() > 1) spec.schedule = values;
    spec.validate();
    return spec;
}

DenoiserSpec external_denoiser(const std::string& command_line, double strength) {
    DenoiserSpec spec;
    spec.kind = DenoiserKind::external;
    spec.strength = strength;
    std::istringstream in(command_line);
    for (std::string tok; in >> tok;) spec.command.push_back(tok);
    spec.validate();
    return spec;
}

std::string describe(const DenoiserSpec& spec) {
    std::ostringstream out;
    out << to_string(spec.kind) << ':';
    if (spec.schedule.empty()) {
        out << spec.strength;
    } else {
        for (std::size_t i = 0; i < spec.schedule.size(); ++i) out << (i ? "," : "") << spec.schedule[i];
    }
    if (spec.kind == DenoiserKind::external) {
        out << " [";
        for (std::size_t i = 0; i < spec.command.size(); ++i) out << (i ? " " : "") << spec.command[i];
        out << ']';
    }
    return out.str();
}

ImageTensor tv_rof_denoise(const ImageTensor& x, double weight, int iters) {
    if (weight == 0.0) return x;
    FeasibilityModel model(LinearOperator::identity(x.shape()), x);
    model.tv_weight = weight;
    model.tv_exponent = Exponent::one;
    // Penalty 50 * weight puts the Huber corner of the split energy at
    // |grad| = weight / (2 rho) = 0.01, well below typical edge contrast.
    model.rho_h = model.rho_v = 50.0 * weight;
    model.hqs_iters = iters;
    model.x_solver = XSolver::fft;
    return solve_G(model, x);
}

// Edge-aware recursive filter on the domain transform (Gastal & Oliveira),
// alternating horizontal and vertical passes with shrinking spatial sigma.
ImageTensor recursive_filter(const ImageTensor& x, double sigma_r, double sigma_s, int passes) {
    if (sigma_r == 0.0) return x;
    const std::size_t H = x.height(), W = x.width(), C = x.channels();
    const double ratio = sigma_s / sigma_r;
    std::vector<double> dh(H * W, 1.0), dv(H * W, 1.0);
    for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j) {
            double gh = 0.0, gv = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                if (j > 0) gh += std::abs(x.at(i, j, c) - x.at(i, j - 1, c));
                if (i > 0) gv += std::abs(x.at(i, j, c) - x.at(i - 1, j, c));
            }
            dh[i * W + j] += ratio * gh;
            dv[i * W + j] += ratio * gv;
        }

    ImageTensor out = x;
    const double n = static_cast<double>(passes);
    for (int p = 0; p < passes; ++p) {
        const double sigma_p = sigma_s * std::sqrt(3.0) * std::pow(2.0, n - (p + 1)) / std::sqrt(std::pow(4.0, n) - 1.0);
        const double a = std::exp(-std::sqrt(2.0) / sigma_p);
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t i = 0; i < H; ++i) {
                for (std::size_t j = 1; j < W; ++j) {
                    const double w = std::pow(a, dh[i * W + j]);
                    out.at(i, j, c) += w * (out.at(i, j - 1, c) - out.at(i, j, c));
                }
                for (std::size_t j = W - 1; j-- > 0;) {
                    const double w = std::pow(a, dh[i * W + j + 1]);
                    out.at(i, j, c) += w * (out.at(i, j + 1, c) - out.at(i, j, c));
                }
            }
            for (std::size_t j = 0; j < W; ++j) {
                for (std::size_t i = 1; i < H; ++i) {
                    const double w = std::pow(a, dv[i * W + j]);
                    out.at(i, j, c) += w * (out.at(i - 1, j, c) - out.at(i, j, c));
                }
                for (std::size_t i = H - 1; i-- > 0;) {
                    const double w = std::pow(a, dv[(i + 1) * W + j]);
                    out.at(i, j, c) += w * (out.at(i + 1, j, c) - out.at(i, j, c));
                }
            }
        }
    }
    return out;
}

ImageTensor gaussian_smooth(const ImageTensor& x, double sigma) {
    if (sigma == 0.0) return x;
    const std::size_t max_radius = (std::min(x.height(), x.width()) - 1) / 2;
    const std::size_t radius = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(3.0 * sigma)), max_radius);
    std::vector<double> taps(2 * radius + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += taps[i];
    }
    for (double& t : taps) t /= total;

    const std::size_t H = x.height(), W = x.width();
    ImageTensor tmp(x.shape()), out(x.shape());
    const auto r = static_cast<std::ptrdiff_t>(radius);
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t i = 0; i < H; ++i)
            for (std::size_t j = 0; j < W; ++j) {
                double acc = 0.0;
                for (std::ptrdiff_t d = -r; d <= r; ++d) {
                    const std::size_t jj = static_cast<std::size_t>((static_cast<std::ptrdiff_t>(j) + d + static_cast<std::ptrdiff_t>(W) * 4) %
                                                                    static_cast<std::ptrdiff_t>(W));
                    acc += taps[static_cast<std::size_t>(d + r)] * x.at(i, jj, c);
                }
                tmp.at(i, j, c) = acc;
            }
        for (std::size_t i = 0; i < H; ++i)
            for (std::size_t j = 0; j < W; ++j) {
                double acc = 0.0;
                for (std::ptrdiff_t d = -r; d <= r; ++d) {
                    const std::size_t ii = static_cast<std::size_t>((static_cast<std::ptrdiff_t>(i) + d + static_cast<std::ptrdiff_t>(H) * 4) %
                                                                    static_cast<std::ptrdiff_t>(H));
                    acc += taps[static_cast<std::size_t>(d + r)] * tmp.at(ii, j, c);
                }
                out.at(i, j, c) = acc;
            }
    }
    return out;
}

ImageTensor median_filter(const ImageTensor& x, int radius) {
    if (radius <= 0) return x;
    const auto H = static_cast<std::ptrdiff_t>(x.height()), W = static_cast<std::ptrdiff_t>(x.width());
    ImageTensor out(x.shape());
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::ptrdiff_t i = 0; i < H; ++i)
            for (std::ptrdiff_t j = 0; j < W; ++j) {
                window.clear();
                for (std::ptrdiff_t di = -radius; di <= radius; ++di)
                    for (std::ptrdiff_t dj = -radius; dj <= radius; ++dj)
                        window.push_back(x.at(static_cast<std::size_t>(((i + di) % H + H) % H),
                                              static_cast<std::size_t>(((j + dj) % W + W) % W), c));
                auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
                std::nth_element(window.begin(), mid, window.end());
                out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j), c) = *mid;
            }
    return out;
}

ImageTensor wavelet_shrink(const ImageTensor& x, double threshold, int levels) {
    if (threshold == 0.0) return x;
    return wavelet_inverse(prox_lp(wavelet_forward(x, levels), ProxSpec{Exponent::one, threshold}), levels);
}

ImageTensor denoise(const DenoiserSpec& spec, const ImageTensor& x, int iter_index) {
    spec.validate();
    const double s = spec.strength_at(iter_index);
    if (s == 0.0) return x;
    ImageTensor out;
    switch (spec.kind) {
        case DenoiserKind::tv_rof: out = tv_rof_denoise(x, s); break;
        case DenoiserKind::recursive_filter: out = recursive_filter(x, s); break;
        case DenoiserKind::gaussian: out = gaussian_smooth(x, s); break;
        case DenoiserKind::median: out = median_filter(x, std::max(1, static_cast<int>(std::lround(s)))); break;
        case DenoiserKind::wavelet_shrink: out = wavelet_shrink(x, s); break;
        case DenoiserKind::external: out = external_roundtrip(spec.command, x, s, spec.timeout_seconds); break;
    }
    if (out.shape() != x.shape()) throw DenoiserError("denoiser changed the image shape");
    if (!out.all_finite()) throw DenoiserError("denoiser produced non-finite values");
    return out;
}

}  // namespace tlf
