#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <fftw3.h>

#include "convexflow/common.hpp"

namespace convexflow {

// Real FFT engine for one periodic grid size. Plans are created once with
// FFTW_UNALIGNED so they can execute on ordinary heap buffers; execution on
// per-call buffers is thread-safe.
class CircleSpectral {
public:
    explicit CircleSpectral(int m) : m_(m) {
        std::vector<double> re(m);
        std::vector<std::complex<double>> co(m / 2 + 1);
        fwd_ = fftw_plan_dft_r2c_1d(m, re.data(), reinterpret_cast<fftw_complex*>(co.data()),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_c2r_1d(m, reinterpret_cast<fftw_complex*>(co.data()), re.data(),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!fwd_ || !bwd_) throw Error("CircleSpectral: fftw plan creation failed");
    }
    ~CircleSpectral() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    CircleSpectral(const CircleSpectral&) = delete;
    CircleSpectral& operator=(const CircleSpectral&) = delete;

    int size() const { return m_; }

    // Forward coefficients c_k = (1/M) sum_j f_j e^{-ik theta_j}, k = 0..M/2.
    std::vector<std::complex<double>> analyze(std::span<const double> f) const {
        check(f);
        std::vector<double> in(f.begin(), f.end());
        std::vector<std::complex<double>> out(m_ / 2 + 1);
        fftw_execute_dft_r2c(fwd_, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
        double s = 1.0 / m_;
        for (auto& c : out) c *= s;
        return out;
    }

    std::vector<double> synthesize(std::span<const std::complex<double>> coeffs) const {
        if (static_cast<int>(coeffs.size()) != m_ / 2 + 1)
            throw InvalidArgument("synthesize: coefficient count mismatch");
        std::vector<std::complex<double>> in(coeffs.begin(), coeffs.end());
        std::vector<double> out(m_);
        fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
        return out;
    }

    // f'' + f, the 2D radius-of-curvature operator: multiplier (1 - k^2).
    std::vector<double> radii(std::span<const double> f) const {
        auto c = analyze(f);
        for (int k = 0; k <= m_ / 2; ++k) c[k] *= 1.0 - static_cast<double>(k) * k;
        return synthesize(c);
    }

    std::vector<double> derivative(std::span<const double> f) const {
        auto c = analyze(f);
        for (int k = 0; k <= m_ / 2; ++k) c[k] *= std::complex<double>(0.0, k);
        c[m_ / 2] = 0.0;  // Nyquist mode has no well-defined odd derivative
        return synthesize(c);
    }

    std::vector<double> second_derivative(std::span<const double> f) const {
        auto c = analyze(f);
        for (int k = 0; k <= m_ / 2; ++k) c[k] *= -static_cast<double>(k) * k;
        return synthesize(c);
    }

    // Solve h'' + h = f for the mode-1-free part of f; mode 1 of h is set to
    // zero (translation gauge).
    std::vector<double> solve_radii(std::span<const double> f) const {
        auto c = analyze(f);
        c[1] = 0.0;
        for (int k = 0; k <= m_ / 2; ++k)
            if (k != 1) c[k] /= 1.0 - static_cast<double>(k) * k;
        return synthesize(c);
    }

    // Magnitude of the mode-1 component of f relative against its mean-scale.
    Vec3 first_harmonic(std::span<const double> f) const {
        auto c = analyze(f);
        return {2.0 * c[1].real(), -2.0 * c[1].imag(), 0.0};  // (cos, sin) coefficients
    }

    // Trigonometric evaluation of the interpolant at an arbitrary angle.
    static double eval(std::span<const std::complex<double>> coeffs, int m, double theta) {
        double s = coeffs[0].real();
        for (int k = 1; k < m / 2; ++k)
            s += 2.0 * (coeffs[k].real() * std::cos(k * theta) - coeffs[k].imag() * std::sin(k * theta));
        s += coeffs[m / 2].real() * std::cos((m / 2) * theta);
        return s;
    }
    static double eval_derivative(std::span<const std::complex<double>> coeffs, int m, double theta) {
        double s = 0.0;
        for (int k = 1; k < m / 2; ++k)
            s += 2.0 * k * (-coeffs[k].real() * std::sin(k * theta) - coeffs[k].imag() * std::cos(k * theta));
        return s;
    }
    static double eval_radii(std::span<const std::complex<double>> coeffs, int m, double theta) {
        double s = coeffs[0].real();
        for (int k = 1; k < m / 2; ++k)
            s += 2.0 * (1.0 - static_cast<double>(k) * k) *
                 (coeffs[k].real() * std::cos(k * theta) - coeffs[k].imag() * std::sin(k * theta));
        s += (1.0 - 0.25 * m * m) * coeffs[m / 2].real() * std::cos((m / 2) * theta);
        return s;
    }

private:
    void check(std::span<const double> f) const {
        if (static_cast<int>(f.size()) != m_) throw InvalidArgument("CircleSpectral: sample count mismatch");
    }

    int m_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

}  // namespace convexflow
