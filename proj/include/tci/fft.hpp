#pragma once

#include <complex>
#include <map>
#include <memory>
#include <vector>

#include <fftw3.h>

#include "tci/grid.hpp"

namespace tci {

/// Spectral coefficients of a real periodic field. Layout matches the grid
/// (row-major over mode indices); mode index i maps to the integer wavevector
/// component k = i for i <= N/2, k = i - N otherwise. Coefficients follow the
/// convention f(x) = sum_k c(k) exp(2*pi*i k.x), so a real field has
/// Hermitian-symmetric coefficients.
struct SpectralCoeffs {
    GridSpec grid;
    std::vector<std::complex<double>> c;

    SpectralCoeffs() = default;
    explicit SpectralCoeffs(const GridSpec& g) : grid(g), c(g.npoints()) {}

    static int mode_of_index(int i, int N) { return i <= N / 2 ? i : i - N; }

    /// Integer wavevector of a flat coefficient index.
    std::array<int, 3> wavevector(std::size_t idx) const {
        std::array<int, 3> k{0, 0, 0};
        for (int a = grid.n - 1; a >= 0; --a) {
            k[a] = mode_of_index(static_cast<int>(idx % grid.N), grid.N);
            idx /= grid.N;
        }
        return k;
    }

    double hermitian_error() const {
        double worst = 0.0;
        const int N = grid.N;
        for (std::size_t i = 0; i < c.size(); ++i) {
            auto k = wavevector(i);
            std::array<int, 3> mk{};
            for (int a = 0; a < grid.n; ++a) mk[a] = ((-k[a]) % N + N) % N;
            std::size_t j = 0;
            for (int a = 0; a < grid.n; ++a) j = j * N + mk[a];
            worst = std::max(worst, std::abs(c[i] - std::conj(c[j])));
        }
        return worst;
    }
};

/// Serial FFTW wrapper with cached plans per (n, N, direction).
class Fft {
public:
    static Fft& instance() {
        static Fft f;
        return f;
    }

    /// Exact-mean-normalized forward transform: c(k) = (1/N^n) sum f(x) e^{-2pi i k.x}.
    SpectralCoeffs forward(const ScalarGridField& f) {
        SpectralCoeffs out(f.grid);
        auto& buf = buffer(f.grid);
        for (std::size_t i = 0; i < f.v.size(); ++i) buf[i] = f.v[i];
        execute(f.grid, FFTW_FORWARD, buf.data());
        const double scale = 1.0 / static_cast<double>(f.grid.npoints());
        for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] = buf[i] * scale;
        return out;
    }

    ScalarGridField inverse(const SpectralCoeffs& s) {
        ScalarGridField out(s.grid);
        auto& buf = buffer(s.grid);
        for (std::size_t i = 0; i < s.c.size(); ++i) buf[i] = s.c[i];
        execute(s.grid, FFTW_BACKWARD, buf.data());
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = buf[i].real();
        return out;
    }

    /// In-place transforms on raw complex data laid out like the grid.
    void forward_raw(const GridSpec& g, std::complex<double>* data) {
        execute(g, FFTW_FORWARD, data);
        const double scale = 1.0 / static_cast<double>(g.npoints());
        for (std::size_t i = 0; i < g.npoints(); ++i) data[i] *= scale;
    }
    void inverse_raw(const GridSpec& g, std::complex<double>* data) {
        execute(g, FFTW_BACKWARD, data);
    }

private:
    Fft() = default;
    ~Fft() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::vector<std::complex<double>>& buffer(const GridSpec& g) {
        auto& b = buffers_[{g.n, g.N}];
        if (b.size() != g.npoints()) b.assign(g.npoints(), {0.0, 0.0});
        return b;
    }

    void execute(const GridSpec& g, int sign, std::complex<double>* data) {
        auto key = std::make_tuple(g.n, g.N, sign);
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            std::vector<int> dims(static_cast<std::size_t>(g.n), g.N);
            // In-place guru plan on a scratch buffer; FFTW_ESTIMATE keeps
            // planning deterministic and does not touch the array contents.
            std::vector<std::complex<double>> scratch(g.npoints());
            fftw_plan p = fftw_plan_dft(g.n, dims.data(),
                                        reinterpret_cast<fftw_complex*>(scratch.data()),
                                        reinterpret_cast<fftw_complex*>(scratch.data()),
                                        sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
            it = plans_.emplace(key, p).first;
        }
        fftw_execute_dft(it->second, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
    std::map<std::pair<int, int>, std::vector<std::complex<double>>> buffers_;
};

} // namespace tci
