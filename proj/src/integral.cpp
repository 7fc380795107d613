#include "degraf/integral.hpp"

namespace degraf {

SummedAreaTable::SummedAreaTable(const GrayImage& image)
    : width_(image.width()), height_(image.height()) {
    const std::size_t stride = width_ + 1;
    const std::size_t total = stride * (height_ + 1);
    plain_.assign(total, 0.0);
    row_weighted_.assign(total, 0.0);
    col_weighted_.assign(total, 0.0);

    for (int y = 0; y < height_; ++y) {
        const float* in = image.row(y);
        const double* prev_p = plain_.data() + static_cast<std::size_t>(y) * stride;
        const double* prev_r = row_weighted_.data() + static_cast<std::size_t>(y) * stride;
        const double* prev_c = col_weighted_.data() + static_cast<std::size_t>(y) * stride;
        double* out_p = plain_.data() + static_cast<std::size_t>(y + 1) * stride;
        double* out_r = row_weighted_.data() + static_cast<std::size_t>(y + 1) * stride;
        double* out_c = col_weighted_.data() + static_cast<std::size_t>(y + 1) * stride;

        double run_p = 0.0, run_r = 0.0, run_c = 0.0;
        out_p[0] = out_r[0] = out_c[0] = 0.0;
        for (int x = 0; x < width_; ++x) {
            const double v = in[x];
            run_p += v;
            run_r += static_cast<double>(y) * v;
            run_c += static_cast<double>(x) * v;
            out_p[x + 1] = prev_p[x + 1] + run_p;
            out_r[x + 1] = prev_r[x + 1] + run_r;
            out_c[x + 1] = prev_c[x + 1] + run_c;
        }
    }
}

}  // namespace degraf
