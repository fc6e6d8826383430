#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "loopforge/errors.hpp"

namespace loopforge::stats {

// Regularized upper incomplete gamma Q(a,x), series/continued-fraction split.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw invalid_input("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) by series, return 1-P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - gln);
        return 1.0 - p;
    }
    // Lentz continued fraction for Q
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi_square_pvalue(double stat, int dof) {
    if (dof <= 0) throw invalid_input("chi_square_pvalue: dof must be positive");
    return gamma_q(0.5 * dof, 0.5 * stat);
}

// Pearson statistic of observed counts against expected counts.
inline double chi_square_stat(const std::vector<double>& observed,
                              const std::vector<double>& expected) {
    double s = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw invalid_input("chi_square_stat: nonpositive expected count");
        double d = observed[i] - expected[i];
        s += d * d / expected[i];
    }
    return s;
}

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 200; ++j) {
        double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double pvalue = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value (Stephens'
// small-sample correction).  Inputs need not be sorted.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw invalid_input("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    double ne = std::sqrt(na * nb / (na + nb));
    KsResult r;
    r.statistic = d;
    r.pvalue = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0; // sum of squared deviations

    void add(double x) {
        ++n;
        double d1 = x - mean;
        mean += d1 / static_cast<double>(n);
        m2 += d1 * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_mean() const {
        return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

} // namespace loopforge::stats
