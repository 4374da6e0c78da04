#pragma once

// Independent brute-force reference implementations used to cross-check the
// library. These deliberately share no code with src/: long double
// accumulation, direct formula transcription, Cramer solves.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Stats {
    double min = 0, max = 0, mean = 0, median = 0;
    bool has_std = false, has_skew = false, has_kurt = false;
    double std_dev = 0, skewness = 0, kurtosis = 0;
};

inline Stats stats(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) throw std::runtime_error("oracle: empty");
    Stats s;
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;

    long double sum = 0.0L;
    for (double x : v) sum += x;
    const long double m = sum / static_cast<long double>(n);
    s.mean = static_cast<double>(m);

    long double s2 = 0, s3 = 0, s4 = 0;
    for (double x : v) {
        const long double d = x - m;
        s2 += d * d;
        s3 += d * d * d;
        s4 += d * d * d * d;
    }
    const long double nl = static_cast<long double>(n);
    if (n >= 2) {
        s.has_std = true;
        s.std_dev = static_cast<double>(std::sqrt(s2 / (nl - 1)));
    }
    const long double m2 = s2 / nl, m3 = s3 / nl, m4 = s4 / nl;
    if (m2 > 0) {
        if (n >= 3) {
            s.has_skew = true;
            s.skewness = static_cast<double>(nl * nl / ((nl - 1) * (nl - 2)) * m3 /
                                             std::pow(m2, 1.5L));
        }
        if (n >= 4) {
            s.has_kurt = true;
            s.kurtosis = static_cast<double>(
                (nl - 1) / ((nl - 2) * (nl - 3)) * ((nl + 1) * (m4 / (m2 * m2) - 3) + 6));
        }
    }
    return s;
}

/// Degree-1 least squares by Cramer's rule on raw power sums.
struct Line {
    double slope = 0, intercept = 0;
};

inline Line line_fit(std::span<const double> x, std::span<const double> y) {
    const long double n = static_cast<long double>(x.size());
    long double sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        sy += y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    const long double det = n * sxx - sx * sx;
    if (det == 0) throw std::runtime_error("oracle: singular");
    Line l;
    l.slope = static_cast<double>((n * sxy - sx * sy) / det);
    l.intercept = static_cast<double>((sxx * sy - sx * sxy) / det);
    return l;
}

/// Central finite-difference derivative of f at x.
template <class F>
double derivative(F&& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace oracle
