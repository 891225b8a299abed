#pragma once

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <span>
#include <vector>

namespace oracle {

using Dec = boost::multiprecision::cpp_dec_float_50;

/// Closed double interval guaranteed to contain a decimal value.
struct Enclosure {
    double lo;
    double hi;
};

/// Rounds a 50-digit value outward to doubles, padded 2 ulp on each side.
Enclosure enclose(const Dec& v);

/// e^x to 50 digits.
Dec exp_value(double x);

/// sum_j c_j e^{s_j} / sum_j e^{s_j}, to 50 digits.
Dec objective(std::span<const double> c, std::span<const double> s);

/// Minimum of the objective over every vertex of [lower, upper], evaluated to
/// 50 digits. Enumerates 2^K vertices; intended for K <= 12.
Dec vertex_min(std::span<const double> c, std::span<const double> lower,
               std::span<const double> upper);

/// Same enumeration in plain double arithmetic, returning the minimizing vertex.
struct DoubleMin {
    double value;
    std::vector<double> vertex;
};
DoubleMin vertex_min_double(std::span<const double> c, std::span<const double> lower,
                            std::span<const double> upper);

} // namespace oracle
