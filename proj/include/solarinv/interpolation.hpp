#pragma once

#include <span>
#include <vector>

namespace solarinv {

/// Piecewise cubic Hermite interpolant through (x_i, y_i) with prescribed
/// node slopes, passed through the Fritsch-Carlson limiter so that monotone
/// data gives a monotone interpolant. Queries outside [x_0, x_n] throw DomainError.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes);

    double operator()(double x) const;
    double derivative(double x) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    std::span<const double> knots() const { return x_; }
    std::span<const double> values() const { return y_; }
    std::span<const double> slopes() const { return m_; }

private:
    std::size_t interval(double x) const;

    std::vector<double> x_, y_, m_;
};

}  // namespace solarinv
