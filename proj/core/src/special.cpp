#include "gpn/special.hpp"

#include <cmath>

#include "gpn/errors.hpp"

namespace gpn {

namespace {

// Bernoulli numbers B_2 .. B_16.
constexpr double kBern[8] = {
    1.0 / 6.0,    -1.0 / 30.0,     1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0,   -691.0 / 2730.0, 7.0 / 6.0,  -3617.0 / 510.0,
};

// Below this the asymptotic series is not accurate enough; shift first.
constexpr double kSeriesThreshold = 8.0;

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2

void check_domain(double x, const char* fn) {
    if (!(x > 0.0)) {
        throw DomainError(std::string(fn) + ": argument must be positive");
    }
}

}  // namespace

double lgamma(double x) {
    check_domain(x, "lgamma");
    // lgamma(x) = lgamma(x + m) - sum log(x + k)
    double shift = 0.0;
    while (x < kSeriesThreshold) {
        shift += std::log(x);
        x += 1.0;
    }
    // Stirling series: B_2n / (2n (2n-1) x^(2n-1))
    const double inv2 = 1.0 / (x * x);
    double series = 0.0;
    double power = 1.0 / x;  // x^-(2n-1)
    for (int n = 1; n <= 8; ++n) {
        series += kBern[n - 1] / (2.0 * n * (2.0 * n - 1.0)) * power;
        power *= inv2;
    }
    return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + series - shift;
}

double digamma(double x) {
    check_domain(x, "digamma");
    // psi(x) = psi(x + 1) - 1/x
    double shift = 0.0;
    while (x < kSeriesThreshold) {
        shift += 1.0 / x;
        x += 1.0;
    }
    // psi(x) = log x - 1/(2x) - sum B_2n / (2n x^2n)
    const double inv2 = 1.0 / (x * x);
    double series = 0.0;
    double power = inv2;  // x^-2n
    for (int n = 1; n <= 8; ++n) {
        series += kBern[n - 1] / (2.0 * n) * power;
        power *= inv2;
    }
    return std::log(x) - 0.5 / x - series - shift;
}

double trigamma(double x) {
    check_domain(x, "trigamma");
    // psi'(x) = psi'(x + 1) + 1/x^2
    double shift = 0.0;
    while (x < kSeriesThreshold) {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    // psi'(x) = 1/x + 1/(2x^2) + sum B_2n / x^(2n+1)
    const double inv2 = 1.0 / (x * x);
    double series = 0.0;
    double power = inv2 / x;  // x^-(2n+1)
    for (int n = 1; n <= 8; ++n) {
        series += kBern[n - 1] * power;
        power *= inv2;
    }
    return 1.0 / x + 0.5 * inv2 + series + shift;
}

}  // namespace gpn
