#include "solarinv/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "solarinv/errors.hpp"

namespace solarinv {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes)
    : x_(std::move(x)), y_(std::move(y)), m_(std::move(slopes)) {
    if (x_.size() < 2 || y_.size() != x_.size() || m_.size() != x_.size()) {
        throw DomainError("MonotoneCubic needs at least two knots and matching value/slope arrays");
    }
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
        if (!(x_[i + 1] > x_[i])) throw DomainError("MonotoneCubic knots must be strictly increasing");
    }
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
        const double delta = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        if (delta == 0.0) {
            m_[i] = m_[i + 1] = 0.0;
            continue;
        }
        double a = m_[i] / delta;
        double b = m_[i + 1] / delta;
        if (a < 0.0) m_[i] = a = 0.0;
        if (b < 0.0) m_[i + 1] = b = 0.0;
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double tau = 3.0 / std::sqrt(r2);
            m_[i] = tau * a * delta;
            m_[i + 1] = tau * b * delta;
        }
    }
}

std::size_t MonotoneCubic::interval(double x) const {
    const double span = x_.back() - x_.front();
    const double slack = 1e-12 * std::max(1.0, std::abs(span));
    if (!(x >= x_.front() - slack && x <= x_.back() + slack)) {
        throw DomainError("interpolation query " + std::to_string(x) + " outside [" + std::to_string(x_.front()) +
                          ", " + std::to_string(x_.back()) + "]");
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(std::distance(x_.begin(), it));
    if (i == 0) return 0;
    return std::min(i - 1, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double d00 = 6 * t2 - 6 * t;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = -6 * t2 + 6 * t;
    const double d11 = 3 * t2 - 2 * t;
    return (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * m_[i] + d11 * m_[i + 1];
}

}  // namespace solarinv
