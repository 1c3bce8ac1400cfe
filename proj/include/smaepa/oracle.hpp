#pragma once

// Reference implementations written straight from the textbook definitions.
// They share no code with the production paths and exist so tests can check
// one against the other. Quadratic loops and full sorts are intentional.

#include <cmath>
#include <cstddef>
#include <vector>

#include "smaepa/error.hpp"

namespace smaepa::oracle {

inline double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DimensionError("oracle_pearson: need equal lengths >= 2");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); i++) sx += x[i];
    for (std::size_t i = 0; i < y.size(); i++) sy += y[i];
    double mx = sx / x.size();
    double my = sy / y.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); i++) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) throw UndefinedCorrelation("oracle_pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

// Insertion sort keeps this free of <algorithm>.
inline void oracle_sort(std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); i++) {
        double key = v[i];
        std::size_t j = i;
        while (j > 0 && v[j - 1] > key) {
            v[j] = v[j - 1];
            j--;
        }
        v[j] = key;
    }
}

inline double oracle_theil_sen(const std::vector<double>& v) {
    if (v.size() < 2) throw InsufficientData("oracle_theil_sen: need at least 2 values");
    std::vector<double> slopes;
    for (std::size_t i = 0; i < v.size(); i++)
        for (std::size_t j = i + 1; j < v.size(); j++)
            slopes.push_back((v[j] - v[i]) / static_cast<double>(j - i));
    oracle_sort(slopes);
    std::size_t m = slopes.size();
    if (m % 2 == 1) return slopes[m / 2];
    return (slopes[m / 2 - 1] + slopes[m / 2]) / 2.0;
}

// Thresholds f_1..f_{q-1}: linear interpolation between order statistics at
// 0-indexed position k(n-1)/q.
inline std::vector<double> oracle_quantile_thresholds(std::vector<double> training, int q) {
    oracle_sort(training);
    std::vector<double> out;
    double n = static_cast<double>(training.size());
    for (int k = 1; k < q; k++) {
        double pos = static_cast<double>(k) * (n - 1) / static_cast<double>(q);
        double lo = std::floor(pos);
        double frac = pos - lo;
        std::size_t i = static_cast<std::size_t>(lo);
        double below = training[i];
        double above = i + 1 < training.size() ? training[i + 1] : training[i];
        out.push_back(below + frac * (above - below));
    }
    return out;
}

// Class of `value` under intervals (-inf, f_1], (f_1, f_2], ..., (f_{q-1}, inf).
inline int oracle_quantile_label(const std::vector<double>& training, int q, double value) {
    std::vector<double> f = oracle_quantile_thresholds(training, q);
    int label = 0;
    for (int k = 0; k < q - 1; k++) {
        if (value > f[k]) label = k + 1;
    }
    return label;
}

} // namespace smaepa::oracle
