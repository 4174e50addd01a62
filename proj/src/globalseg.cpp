#include "tomoseg/globalseg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tomoseg {

namespace {
constexpr int kHistogramBins = 256;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
} // namespace

std::vector<int> otsu_split_bins(const std::vector<double>& counts, int n) {
    const int bins = static_cast<int>(counts.size());
    if (n < 1)
        throw std::invalid_argument("otsu_split_bins: n must be >= 1");
    if (n > bins)
        throw std::invalid_argument("otsu_split_bins: more classes than bins");
    if (n == 1) return {};

    // Prefix sums of counts and count-weighted bin indices; between-class
    // variance of a class [lo, hi) is S^2 / W in these units (the global-mean
    // term is constant over all partitions).
    std::vector<double> cw(bins + 1, 0.0), cs(bins + 1, 0.0);
    for (int i = 0; i < bins; ++i) {
        cw[i + 1] = cw[i] + counts[i];
        cs[i + 1] = cs[i] + counts[i] * i;
    }
    auto class_score = [&](int lo, int hi) {
        const double w = cw[hi] - cw[lo];
        if (w <= 0.0) return 0.0;
        const double s = cs[hi] - cs[lo];
        return s * s / w;
    };

    // best[k][b]: max score splitting bins [b, bins) into k classes, where
    // every class must be a non-degenerate bin range (>= 1 bin).
    const double kNegInf = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(n + 1, std::vector<double>(bins + 1, kNegInf));
    std::vector<std::vector<int>> choice(n + 1, std::vector<int>(bins + 1, -1));
    for (int b = 0; b <= bins; ++b) best[1][b] = class_score(b, bins);
    for (int k = 2; k <= n; ++k) {
        for (int b = 0; b + k <= bins; ++b) {
            double bv = kNegInf;
            int bt = -1;
            for (int t = b + 1; t + (k - 1) <= bins; ++t) {
                const double v = class_score(b, t) + best[k - 1][t];
                if (v > bv) { // strict: keeps the smallest t, lexicographic ties
                    bv = v;
                    bt = t;
                }
            }
            best[k][b] = bv;
            choice[k][b] = bt;
        }
    }

    std::vector<int> splits;
    splits.reserve(n - 1);
    int b = 0;
    for (int k = n; k >= 2; --k) {
        const int t = choice[k][b];
        splits.push_back(t);
        b = t;
    }
    return splits;
}

namespace {

struct HistogramInfo {
    std::vector<double> counts;
    double lo = 0.0;
    double bin_width = 0.0;
};

HistogramInfo histogram_256(const Image& f) {
    HistogramInfo h;
    h.counts.assign(kHistogramBins, 0.0);
    const auto [mn, mx] = std::minmax_element(f.data.begin(), f.data.end());
    h.lo = *mn;
    const double range = *mx - *mn;
    h.bin_width = range / kHistogramBins;
    if (range <= 0.0) return h; // degenerate, caller decides
    for (double v : f.data) {
        int b = static_cast<int>((v - h.lo) / h.bin_width);
        b = std::clamp(b, 0, kHistogramBins - 1);
        h.counts[b] += 1.0;
    }
    return h;
}

} // namespace

std::vector<double> otsu_thresholds(const Image& f, int n) {
    if (n < 1 || n > 256)
        throw std::invalid_argument("otsu_thresholds: n must be in [1, 256]");
    if (f.data.empty())
        throw std::invalid_argument("otsu_thresholds: empty image");
    if (n == 1) return {};
    HistogramInfo h = histogram_256(f);
    if (h.bin_width <= 0.0)
        throw std::runtime_error("otsu_thresholds: degenerate histogram (constant image)");
    std::vector<int> splits = otsu_split_bins(h.counts, n);
    std::vector<double> thresholds;
    thresholds.reserve(splits.size());
    // A split at bin t separates bins [.., t) from [t, ..); the gray-value
    // threshold is the midpoint of the adjacent bin centers, i.e. the edge.
    for (int t : splits)
        thresholds.push_back(h.lo + t * h.bin_width);
    return thresholds;
}

SegmentationMap segment(const Image& f, int n) {
    if (n < 2)
        throw std::invalid_argument("segment: n must be >= 2");
    SegmentationMap seg;
    seg.width = f.width;
    seg.height = f.height;
    seg.n_groups = n;
    seg.thresholds = otsu_thresholds(f, n);
    seg.labels.resize(f.size());
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const double v = f.data[i];
        int label = 0;
        for (double t : seg.thresholds)
            if (v >= t) ++label;
        seg.labels[i] = label;
    }
    return seg;
}

SegmentationMap refine(const SegmentationMap& seg, const Image& f, bool eight_neighbors) {
    if (seg.width != f.width || seg.height != f.height)
        throw std::invalid_argument("refine: segmentation does not match image dimensions");
    static const int dx4[4] = {1, -1, 0, 0};
    static const int dy4[4] = {0, 0, 1, -1};
    static const int dx8[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy8[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int* dx = eight_neighbors ? dx8 : dx4;
    const int* dy = eight_neighbors ? dy8 : dy4;
    const int nn = eight_neighbors ? 8 : 4;

    SegmentationMap out = seg;
    for (int iy = 0; iy < seg.height; ++iy)
        for (int ix = 0; ix < seg.width; ++ix) {
            const int lab = seg.label_at(ix, iy);
            if (lab == kUngrouped) continue;
            bool keep = true;
            for (int k = 0; k < nn && keep; ++k) {
                const int jx = ix + dx[k];
                const int jy = iy + dy[k];
                if (jx < 0 || jx >= seg.width || jy < 0 || jy >= seg.height) continue;
                if (seg.label_at(jx, jy) != lab) keep = false;
            }
            if (!keep)
                out.labels[static_cast<std::size_t>(iy) * seg.width + ix] = kUngrouped;
        }
    return out;
}

SegmentationMap group_medians(const SegmentationMap& seg, const Image& f) {
    if (seg.width != f.width || seg.height != f.height)
        throw std::invalid_argument("group_medians: segmentation does not match image dimensions");
    SegmentationMap out = seg;
    out.medians.assign(seg.n_groups, kNaN);
    std::vector<std::vector<double>> values(seg.n_groups);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const int lab = seg.labels[i];
        if (lab == kUngrouped) continue;
        values[lab].push_back(f.data[i]);
    }
    for (int k = 0; k < seg.n_groups; ++k) {
        auto& v = values[k];
        if (v.empty()) continue; // empty group, skipped
        const std::size_t m = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + m, v.end());
        double med = v[m];
        if (v.size() % 2 == 0) {
            const double lowmid = *std::max_element(v.begin(), v.begin() + m);
            med = 0.5 * (lowmid + med);
        }
        out.medians[k] = med;
    }
    return out;
}

Image build_fseg(const SegmentationMap& seg, const Image& f) {
    if (seg.width != f.width || seg.height != f.height)
        throw std::invalid_argument("build_fseg: segmentation does not match image dimensions");
    if (static_cast<int>(seg.medians.size()) != seg.n_groups)
        throw std::invalid_argument("build_fseg: medians not computed");
    Image out = f;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const int lab = seg.labels[i];
        if (lab == kUngrouped) continue;
        const double med = seg.medians[lab];
        if (std::isnan(med)) continue; // empty-median group treated as ungrouped
        out.data[i] = med;
    }
    return out;
}

int scheduled_group_count(int iteration, const ReconConfig& cfg) {
    if (cfg.group_count_override >= 2) return cfg.group_count_override;
    return iteration / cfg.n_c + 2;
}

Image global_update(const Image& f, int iteration, const ReconConfig& cfg) {
    cfg.validate();
    const int n = scheduled_group_count(iteration, cfg);
    SegmentationMap seg;
    try {
        seg = segment(f, n);
    } catch (const std::runtime_error&) {
        return f; // degenerate histogram: skip the global step
    }
    seg = refine(seg, f, cfg.refine_eight_neighbors);
    seg = group_medians(seg, f);

    const double beta = cfg.global_beta();
    Image out = f;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const int lab = seg.labels[i];
        if (lab == kUngrouped) continue;
        const double med = seg.medians[lab];
        if (std::isnan(med)) continue;
        out.data[i] = (1.0 - beta) * f.data[i] + beta * med;
    }
    return out;
}

Image segmentation_to_image(const SegmentationMap& seg) {
    Image out(seg.width, seg.height, 0.0);
    for (std::size_t i = 0; i < seg.labels.size(); ++i) {
        const int lab = seg.labels[i];
        if (lab == kUngrouped) continue;
        out.data[i] = std::round(255.0 * (lab + 1) / seg.n_groups);
    }
    return out;
}

} // namespace tomoseg
