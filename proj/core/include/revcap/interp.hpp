#pragma once

#include <cstddef>
#include <vector>

namespace revcap {

/// Monotonicity-preserving piecewise-cubic interpolant (Fritsch-Carlson PCHIP).
/// Evaluation outside the knot range extrapolates linearly with the end slope,
/// which keeps region classification sane for rare excursions.
class PchipCurve {
public:
    PchipCurve() = default;
    PchipCurve(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;

    bool empty() const { return x_.empty(); }
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    double y_front() const { return y_.front(); }
    double y_back() const { return y_.back(); }
    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::size_t segment(double x) const;

    std::vector<double> x_, y_, slope_;
};

/// Cubic Hermite interpolant with caller-supplied exact slopes (used for dense
/// ODE output, where the derivative at every accepted step is known).
class HermiteCurve {
public:
    HermiteCurve() = default;
    HermiteCurve(std::vector<double> x, std::vector<double> y, std::vector<double> slope);

    double operator()(double x) const;
    double derivative(double x) const;

    bool empty() const { return x_.empty(); }
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::size_t segment(double x) const;

    std::vector<double> x_, y_, slope_;
};

/// Piecewise representation of a coefficient curve from (value, first and
/// second derivative) data at knots: the derivative is the C1 cubic Hermite of
/// (f', f'') and the value is its exact antiderivative anchored at the knots.
/// Both one-sided extensions are configurable: Hold pins the end value with
/// zero derivatives (used for the exact A = 0 / B = 0 intervals), Extend
/// continues the outermost polynomial.
class CoeffCurve {
public:
    enum class Extension { Hold, Extend };

    CoeffCurve() = default;
    /// x strictly increasing; f0 is the curve value at x.front().
    CoeffCurve(std::vector<double> x, std::vector<double> fp, std::vector<double> fpp, double f0,
               Extension left = Extension::Extend, Extension right = Extension::Extend);

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    bool empty() const { return x_.empty(); }
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    double value_back() const { return f_.back(); }
    const std::vector<double>& knots() const { return x_; }

    /// Shifts all stored values by a constant (used to re-anchor after a tail
    /// estimate fixes the value at the right end).
    void shift_values(double delta);

private:
    std::size_t segment(double x) const;
    void local(std::size_t i, double x, double& s, double& c2, double& c3) const;

    std::vector<double> x_, fp_, fpp_, f_;
    Extension left_ = Extension::Extend, right_ = Extension::Extend;
};

}  // namespace revcap
