#include "nsrkit/denoise/filters.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace nsr::denoise {

using imaging::ImageF;

namespace {

void check_window(std::size_t window, const char* who) {
    if (window < 3 || window % 2 == 0) {
        throw std::invalid_argument(std::string(who) + ": window must be odd and >= 3, got " + std::to_string(window));
    }
}

// Row and column lookup tables for every padded coordinate.
std::vector<std::size_t> reflect_table(std::size_t n, std::size_t radius) {
    std::vector<std::size_t> t(n + 2 * radius);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = reflect_index(static_cast<long>(i) - static_cast<long>(radius), n);
    return t;
}

}  // namespace

std::size_t reflect_index(long i, std::size_t n) {
    if (n == 1) return 0;
    const long period = 2 * (static_cast<long>(n) - 1);
    long m = i % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < static_cast<long>(n) ? m : period - m);
}

ImageF median_filter(const ImageF& img, std::size_t window) {
    check_window(window, "median_filter");
    const std::size_t r = window / 2;
    const auto ry = reflect_table(img.height, r), rx = reflect_table(img.width, r);
    ImageF out(img.height, img.width);
    std::vector<float> buf(window * window);
    const std::size_t mid = buf.size() / 2;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < img.height; ++y)
            for (std::size_t x = 0; x < img.width; ++x) {
                std::size_t k = 0;
                for (std::size_t dy = 0; dy < window; ++dy)
                    for (std::size_t dx = 0; dx < window; ++dx) buf[k++] = img.at(ry[y + dy], rx[x + dx], c);
                std::nth_element(buf.begin(), buf.begin() + static_cast<long>(mid), buf.end());
                out.at(y, x, c) = buf[mid];
            }
    return out;
}

ImageF wiener_filter(const ImageF& img, std::size_t window) {
    check_window(window, "wiener_filter");
    const std::size_t r = window / 2;
    const auto ry = reflect_table(img.height, r), rx = reflect_table(img.width, r);
    const std::size_t pixels = img.height * img.width;
    const double count = static_cast<double>(window * window);
    ImageF out(img.height, img.width);
    std::vector<double> mean(pixels), var(pixels);
    for (std::size_t c = 0; c < 3; ++c) {
        double noise = 0.0;
        for (std::size_t y = 0; y < img.height; ++y)
            for (std::size_t x = 0; x < img.width; ++x) {
                double s = 0.0;
                for (std::size_t dy = 0; dy < window; ++dy)
                    for (std::size_t dx = 0; dx < window; ++dx) s += img.at(ry[y + dy], rx[x + dx], c);
                const double m = s / count;
                double s2 = 0.0;
                for (std::size_t dy = 0; dy < window; ++dy)
                    for (std::size_t dx = 0; dx < window; ++dx) {
                        const double d = img.at(ry[y + dy], rx[x + dx], c) - m;
                        s2 += d * d;
                    }
                mean[y * img.width + x] = m;
                var[y * img.width + x] = s2 / count;
                noise += s2 / count;
            }
        noise /= static_cast<double>(pixels);
        for (std::size_t p = 0; p < pixels; ++p) {
            const double v = var[p];
            const double denom = std::max(v, noise);
            const double gain = denom > 0.0 ? std::max(v - noise, 0.0) / denom : 0.0;
            const double y = mean[p] + gain * (img.data[p * 3 + c] - mean[p]);
            out.data[p * 3 + c] = static_cast<float>(std::clamp(y, 0.0, 1.0));
        }
    }
    return out;
}

}  // namespace nsr::denoise
