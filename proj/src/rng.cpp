#include "ballbandit/rng.hpp"

#include <cmath>

namespace ballbandit {
namespace detail {

namespace {
// Ziggurat layer geometry for the standard normal (one-sided), 256 layers.
// kR is the base-layer boundary, kV the common layer area.
constexpr double kR = 3.654152885361008772;
constexpr double kV = 0.00492867323399708747;

ZigguratTables build_tables() {
    ZigguratTables t{};
    auto pdf = [](double x) { return std::exp(-0.5 * x * x); };
    t.x[1] = kR;
    t.x[0] = kV / pdf(kR);  // virtual width of the base layer (rectangle + tail)
    for (int i = 2; i <= 255; ++i) {
        const double fx = kV / t.x[i - 1] + pdf(t.x[i - 1]);
        t.x[i] = std::sqrt(-2.0 * std::log(fx));
    }
    t.x[256] = 0.0;
    for (int i = 0; i <= 256; ++i) t.f[i] = pdf(t.x[i]);
    for (int i = 0; i <= 255; ++i) {
        const double ratio = t.x[i + 1] / t.x[i];
        t.cmp[i] = static_cast<std::uint64_t>(ratio * 4503599627370496.0);  // * 2^52
    }
    return t;
}
}  // namespace

const ZigguratTables& ziggurat_tables() {
    static const ZigguratTables tables = build_tables();
    return tables;
}

}  // namespace detail

double RandomSource::normal_tail(bool negative) {
    // Marsaglia's tail method beyond kR.
    for (;;) {
        const double x = -std::log(uniform01_open0()) / detail::ziggurat_tables().x[1];
        const double y = -std::log(uniform01_open0());
        if (y + y >= x * x) {
            const double v = detail::ziggurat_tables().x[1] + x;
            return negative ? -v : v;
        }
    }
}

bool RandomSource::wedge_accept(int idx, double x) {
    const auto& t = *zig_;
    const double y = t.f[idx] + uniform01() * (t.f[idx + 1] - t.f[idx]);
    return y < std::exp(-0.5 * x * x);
}

}  // namespace ballbandit
