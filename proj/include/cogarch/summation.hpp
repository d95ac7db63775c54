#pragma once

// Compensated (Neumaier) summation.  All cross-path reductions in the
// library run through this accumulator in a fixed serial order, which makes
// Monte-Carlo results independent of the worker count: threads only fill
// per-path slots, the reduction itself is sequential.

#include <complex>
#include <cstddef>

namespace cogarch {

class NeumaierSum {
  public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        // The branch picks whichever operand lost low-order bits.
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Complex accumulator: independent compensation per component.
class NeumaierSumComplex {
  public:
    void add(const std::complex<double>& z) noexcept {
        re_.add(z.real());
        im_.add(z.imag());
    }

    std::complex<double> value() const noexcept { return {re_.value(), im_.value()}; }

  private:
    NeumaierSum re_;
    NeumaierSum im_;
};

// Compensated sum of a contiguous range in index order.
template <class Range>
double compensated_total(const Range& values) {
    NeumaierSum acc;
    for (const double v : values) acc.add(v);
    return acc.value();
}

} // namespace cogarch
