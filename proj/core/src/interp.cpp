#include "revcap/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace revcap {

PchipCurve::PchipCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n < 2) throw std::invalid_argument("PchipCurve: need >= 2 knots");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(x_[i] < x_[i + 1])) throw std::invalid_argument("PchipCurve: knots not increasing");
    }
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    slope_.assign(n, 0.0);
    if (n == 2) {
        slope_[0] = slope_[1] = delta[0];
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] == 0.0 || delta[i] == 0.0 || (delta[i - 1] > 0) != (delta[i] > 0)) {
                slope_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        // Fritsch-Carlson one-sided endpoint rule with sign clamping.
        auto end_slope = [](double h0, double h1, double d0, double d1) {
            double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if ((s > 0) != (d0 > 0) || d0 == 0.0)
                s = 0.0;
            else if ((d0 > 0) != (d1 > 0) && std::abs(s) > 3.0 * std::abs(d0))
                s = 3.0 * d0;
            return s;
        };
        slope_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        slope_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
}

std::size_t PchipCurve::segment(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double PchipCurve::operator()(double x) const {
    if (x < x_.front()) return y_.front() + slope_.front() * (x - x_.front());
    if (x > x_.back()) return y_.back() + slope_.back() * (x - x_.back());
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

double PchipCurve::derivative(double x) const {
    if (x < x_.front()) return slope_.front();
    if (x > x_.back()) return slope_.back();
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double dh00 = (6 * t2 - 6 * t) / h;
    const double dh10 = 3 * t2 - 4 * t + 1;
    const double dh01 = (-6 * t2 + 6 * t) / h;
    const double dh11 = 3 * t2 - 2 * t;
    return dh00 * y_[i] + dh10 * slope_[i] + dh01 * y_[i + 1] + dh11 * slope_[i + 1];
}

HermiteCurve::HermiteCurve(std::vector<double> x, std::vector<double> y, std::vector<double> slope)
    : x_(std::move(x)), y_(std::move(y)), slope_(std::move(slope)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n || slope_.size() != n)
        throw std::invalid_argument("HermiteCurve: inconsistent knot data");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(x_[i] < x_[i + 1])) throw std::invalid_argument("HermiteCurve: knots not increasing");
    }
}

std::size_t HermiteCurve::segment(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double HermiteCurve::operator()(double x) const {
    if (x < x_.front()) return y_.front() + slope_.front() * (x - x_.front());
    if (x > x_.back()) return y_.back() + slope_.back() * (x - x_.back());
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * slope_[i + 1];
}

double HermiteCurve::derivative(double x) const {
    if (x < x_.front()) return slope_.front();
    if (x > x_.back()) return slope_.back();
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    return (6 * t2 - 6 * t) / h * y_[i] + (3 * t2 - 4 * t + 1) * slope_[i] +
           (-6 * t2 + 6 * t) / h * y_[i + 1] + (3 * t2 - 2 * t) * slope_[i + 1];
}

CoeffCurve::CoeffCurve(std::vector<double> x, std::vector<double> fp, std::vector<double> fpp,
                       double f0, Extension left, Extension right)
    : x_(std::move(x)), fp_(std::move(fp)), fpp_(std::move(fpp)), left_(left), right_(right) {
    const std::size_t n = x_.size();
    if (n < 2 || fp_.size() != n || fpp_.size() != n)
        throw std::invalid_argument("CoeffCurve: inconsistent knot data");
    f_.assign(n, f0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        // Exact integral of the local cubic for f' over the segment.
        const double h = x_[i + 1] - x_[i];
        double s, c2, c3;
        local(i, x_[i + 1], s, c2, c3);
        (void)s;
        f_[i + 1] = f_[i] + fp_[i] * h + 0.5 * fpp_[i] * h * h + c2 * h * h * h / 3.0 +
                    0.25 * c3 * h * h * h * h;
    }
}

// Local model on [x_i, x_{i+1}]: f'(s) = fp_i + fpp_i*s + c2*s^2 + c3*s^3 with
// s = x - x_i, matching (fp, fpp) at both knots.
void CoeffCurve::local(std::size_t i, double x, double& s, double& c2, double& c3) const {
    const double h = x_[i + 1] - x_[i];
    const double d = (fp_[i + 1] - fp_[i]) / h;
    s = x - x_[i];
    c2 = (3.0 * d - 2.0 * fpp_[i] - fpp_[i + 1]) / h;
    c3 = (fpp_[i] + fpp_[i + 1] - 2.0 * d) / (h * h);
}

std::size_t CoeffCurve::segment(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double CoeffCurve::value(double x) const {
    if (x <= x_.front() && left_ == Extension::Hold) return f_.front();
    if (x >= x_.back() && right_ == Extension::Hold) return f_.back();
    const std::size_t i = segment(x);
    double s, c2, c3;
    local(i, x, s, c2, c3);
    return f_[i] + fp_[i] * s + 0.5 * fpp_[i] * s * s + c2 * s * s * s / 3.0 +
           0.25 * c3 * s * s * s * s;
}

double CoeffCurve::derivative(double x) const {
    if (x <= x_.front() && left_ == Extension::Hold) return 0.0;
    if (x >= x_.back() && right_ == Extension::Hold) return 0.0;
    const std::size_t i = segment(x);
    double s, c2, c3;
    local(i, x, s, c2, c3);
    return fp_[i] + fpp_[i] * s + c2 * s * s + c3 * s * s * s;
}

double CoeffCurve::second_derivative(double x) const {
    if (x <= x_.front() && left_ == Extension::Hold) return 0.0;
    if (x >= x_.back() && right_ == Extension::Hold) return 0.0;
    const std::size_t i = segment(x);
    double s, c2, c3;
    local(i, x, s, c2, c3);
    return fpp_[i] + 2.0 * c2 * s + 3.0 * c3 * s * s;
}

void CoeffCurve::shift_values(double delta) {
    for (double& v : f_) v += delta;
}

}  // namespace revcap
