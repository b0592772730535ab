#include <cmath>

#include <gtest/gtest.h>

#include "lornz/spectra.hpp"
#include "test_support.hpp"

using namespace lornz;

TEST(Lorentzian, CenterHalfPowerAndRange) {
    EXPECT_DOUBLE_EQ(lorentzian_psd(10.0, 10.0, 0.6), 1.0);
    EXPECT_NEAR(lorentzian_psd(10.3, 10.0, 0.6), 0.5, 1e-14);
    EXPECT_NEAR(lorentzian_psd(9.7, 10.0, 0.6), 0.5, 1e-14);
    for (double w = -50.0; w <= 50.0; w += 0.37) {
        const double s = lorentzian_psd(w, 3.0, 1.7);
        EXPECT_GT(s, 0.0);
        EXPECT_LE(s, 1.0);
    }
    EXPECT_THROW(lorentzian_psd(0.0, 0.0, 0.0), ValidationError);
}

TEST(MemoryKernel, ValueSymmetryAndDecay) {
    EXPECT_NEAR(memory_kernel(0.0, 10.0, 0.6).real(), 0.15, 1e-15);
    for (double tau = 0.1; tau < 5.0; tau += 0.3) {
        EXPECT_LT(std::abs(memory_kernel(-tau, 10.0, 0.6) - std::conj(memory_kernel(tau, 10.0, 0.6))), 1e-16);
        EXPECT_NEAR(std::abs(memory_kernel(tau, 10.0, 0.6)), 0.15 * std::exp(-0.3 * tau), 1e-15);
    }
}

TEST(MemoryKernel, ZeroTimeValueEqualsSpectralIntegral) {
    // M(0) = (1/2pi) int S(w) dw, evaluated with Simpson's rule plus the analytic tails.
    const double g0 = 0.6, w0 = 10.0, W = 400.0;
    const int n = 400000;
    const double h = 2.0 * W / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = w0 - W + i * h;
        const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += c * lorentzian_psd(w, w0, g0);
    }
    sum *= h / 3.0;
    sum += 2.0 * 0.25 * g0 * g0 / W;
    EXPECT_NEAR(sum / (2.0 * M_PI), memory_kernel(0.0, w0, g0).real(), 1e-6);
}

TEST(MemoryKernel, HalfLife) {
    for (double g0 : {0.1, 0.6, 5.0, 50.0}) EXPECT_NEAR(kernel_half_life(g0), 2.0 * std::log(2.0) / g0, 1e-9);
}

TEST(MemoryKernel, FftSpectrumIsLorentzian) {
    const KernelSpectrum k = kernel_spectrum_fft(2.0, 0.6, 16, 1e-2);
    double worst = 0.0;
    for (std::size_t i = 0; i < k.omega.size(); ++i) {
        if (std::abs(k.omega[i]) > 20.0) continue;
        worst = std::max(worst, std::abs(k.values[i] - lorentzian_psd(k.omega[i], 2.0, 0.6)));
    }
    EXPECT_LT(worst, 1e-3);
    EXPECT_THROW(kernel_spectrum_fft(2.0, 0.6, 2, 1e-2), ValidationError);
}

TEST(TransferFunctions, NoCouplingMeansNoLeakage) {
    ModelParams p = ModelParams::paper_example();
    p.kappa = 0.0;
    for (double w = -5.0; w <= 5.0; w += 0.25) {
        const TransferPair g = transfer_functions(w, p);
        EXPECT_EQ(std::abs(g.g2), 0.0);
        EXPECT_NEAR(std::abs(g.g1), 1.0, 1e-14);
    }
}

TEST(TransferFunctions, AllPassOnDenseGrid) {
    std::mt19937_64 rng(51);
    const auto grid = frequency_grid(10000, -20.0, 20.0);
    for (int trial = 0; trial < 100; ++trial) {
        const ModelParams p = lornz::testing::random_params(rng);
        double worst = 0.0;
        for (double w : grid) {
            const TransferPair g = transfer_functions(w, p);
            worst = std::max(worst, std::abs(std::norm(g.g1) + std::norm(g.g2) - 1.0));
        }
        EXPECT_LT(worst, 1e-12) << "trial " << trial;
    }
}

TEST(TransferFunctions, ClosedFormMatchesRealisation) {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p = lornz::testing::random_params(rng);
        p.omega_s = 4.0;
        p.omega_0 = 4.0 - p.detuning();
        for (double w = -5.0; w <= 5.0; w += 0.5) {
            const TransferPair a = transfer_functions(w, p);
            const TransferPair b = transfer_functions_state_space(w, p);
            EXPECT_LT(std::abs(a.g1 - b.g1), 1e-10);
            EXPECT_LT(std::abs(a.g2 - b.g2), 1e-10);
        }
    }
}

TEST(TransferFunctions, PsdFormsAgree) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const ModelParams p = lornz::testing::random_params(rng);
        for (double w = -4.0; w <= 4.0; w += 0.4) {
            const TransferPair g = transfer_functions(w, p);
            EXPECT_NEAR(g1_psd(w, p), std::norm(g.g1), 1e-12);
            EXPECT_NEAR(g2_psd(w, p), std::norm(g.g2), 1e-12);
            EXPECT_NEAR(output_psd(w, p), 0.25, 1e-12);
        }
    }
}

TEST(TransferFunctions, ZeroFrequencyClosedForm) {
    // kappa gamma_1 gamma_0^2 / (kappa gamma_0 + gamma_0 gamma_1 / 4)^2
    EXPECT_NEAR(g2_psd(0.0, ModelParams::paper_example()), 0.75, 1e-14);
    ModelParams p = ModelParams::paper_example();
    p.kappa = 0.1;
    p.gamma_0 = 0.1;
    EXPECT_NEAR(g2_psd(0.0, p), 8.0 / 9.0, 1e-14);
}

TEST(TransferFunctions, ResonantSpectrumIsSymmetric) {
    std::mt19937_64 rng(54);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p = lornz::testing::random_params(rng);
        p.omega_0 = p.omega_s;
        for (double w = 0.1; w <= 5.0; w += 0.3) EXPECT_NEAR(g2_psd(w, p), g2_psd(-w, p), 1e-14);
    }
}

TEST(TransferFunctions, DetunedPeakMovesWithDetuning) {
    ModelParams p = ModelParams::paper_example();
    const auto grid = frequency_grid(8001, -5.0, 5.0);
    double previous = -1e9;
    for (double delta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        p.omega_0 = p.omega_s - delta;
        const SpectrumCurve c = g1_curve(p, grid);
        // |G1|^2 dips where the bath leakage peaks; the dip follows the detuning.
        std::size_t lo = 0;
        for (std::size_t i = 1; i < c.values.size(); ++i)
            if (c.values[i] < c.values[lo]) lo = i;
        EXPECT_GT(c.omega[lo], previous);
        previous = c.omega[lo];
    }
}

TEST(SpectrumCurve, ArgmaxAndFwhm) {
    SpectrumCurve c;
    c.omega = frequency_grid(20001, -10.0, 10.0);
    for (double w : c.omega) c.values.push_back(lorentzian_psd(w, 1.0, 0.8));
    EXPECT_NEAR(c.omega[argmax(c)], 1.0, 1e-12);
    EXPECT_NEAR(fwhm(c), 0.8, 1e-6);

    SpectrumCurve narrow;
    narrow.omega = frequency_grid(11, -0.1, 0.1);
    for (double w : narrow.omega) narrow.values.push_back(lorentzian_psd(w, 0.0, 5.0));
    EXPECT_THROW(fwhm(narrow), ValidationError);
    EXPECT_THROW(argmax(SpectrumCurve{}), ValidationError);
}

TEST(SpectrumCurve, GridValidation) {
    EXPECT_THROW(frequency_grid(1, 0.0, 1.0), ValidationError);
    EXPECT_THROW(frequency_grid(10, 1.0, 1.0), ValidationError);
    const auto g = frequency_grid(5, -1.0, 1.0);
    EXPECT_EQ(g.front(), -1.0);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_DOUBLE_EQ(g[2], 0.0);
}

TEST(BroadbandLimit, DeviationShrinksWithBathWidth) {
    const ModelParams p = ModelParams::paper_example();
    const BroadbandReport r = broadband_limit_check({0.6, 5.0, 50.0, 500.0}, p, 1.0);
    EXPECT_TRUE(r.deviation_decreasing);
    EXPECT_TRUE(r.width_shrinking);
    for (const auto& e : r.entries) {
        // Band edge is the worst point: 1 - S(omega_0 + W) = W^2 / (gamma_0^2/4 + W^2).
        EXPECT_NEAR(e.max_deviation, 1.0 / (0.25 * e.gamma_0 * e.gamma_0 + 1.0), 1e-12);
        EXPECT_NEAR(e.kernel_half_life, 2.0 * std::log(2.0) / e.gamma_0, 1e-9);
    }
    EXPECT_THROW(broadband_limit_check({1.0}, p, 0.0), ValidationError);
}
