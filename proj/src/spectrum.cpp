#include <cmath>
#include <complex>
#include <vector>

#include <fftw3.h>

#include "tomoseg/harness.hpp"

namespace tomoseg {

Image spectrum_magnitude(const Image& f) {
    const int W = f.width, H = f.height;
    if (W <= 0 || H <= 0)
        throw std::invalid_argument("spectrum_magnitude: empty image");

    std::vector<std::complex<double>> in(f.size()), out(f.size());
    for (std::size_t i = 0; i < f.data.size(); ++i) in[i] = f.data[i];

    fftw_plan plan = fftw_plan_dft_2d(H, W, reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()),
                                      FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    // Center DC, log-compress, normalize to [0, 1].
    Image mag(W, H, 0.0);
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) {
            const int su = (u + W / 2) % W;
            const int sv = (v + H / 2) % H;
            mag.at(su, sv) = std::log1p(std::abs(out[static_cast<std::size_t>(v) * W + u]));
        }
    double mx = 0.0;
    for (double m : mag.data) mx = std::max(mx, m);
    if (mx > 0.0)
        for (double& m : mag.data) m /= mx;
    return mag;
}

} // namespace tomoseg
