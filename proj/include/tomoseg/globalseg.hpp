#pragma once

#include "tomoseg/config.hpp"
#include "tomoseg/core.hpp"

namespace tomoseg {

inline constexpr int kUngrouped = -1;

/// Gray-level grouping of an image: per-pixel labels in {0..n-1} or
/// kUngrouped, the thresholds that produced them, and per-group medians.
/// Empty groups carry a NaN median and their (nonexistent) pixels are
/// treated as ungrouped.
struct SegmentationMap {
    int width = 0;
    int height = 0;
    std::vector<int> labels;
    int n_groups = 0;
    std::vector<double> medians;    // NaN for empty groups; empty until computed
    std::vector<double> thresholds; // n_groups - 1 strictly increasing gray values

    int label_at(int ix, int iy) const {
        return labels[static_cast<std::size_t>(iy) * width + ix];
    }
};

/// Exact multi-level Otsu split of a histogram: choose n-1 split points
/// maximizing between-class variance via dynamic programming over cumulative
/// moments. Returns the first-bin index of each upper class, strictly
/// increasing, lexicographically smallest among ties.
std::vector<int> otsu_split_bins(const std::vector<double>& counts, int n);

/// n-1 gray-value thresholds maximizing between-class variance over a
/// 256-bin histogram of f's value range. Throws "degenerate histogram"
/// for a constant image with n >= 2.
std::vector<double> otsu_thresholds(const Image& f, int n);

/// Label every pixel by Otsu threshold bucket; empty buckets permitted.
SegmentationMap segment(const Image& f, int n);

/// A pixel keeps its label iff all in-bounds neighbors (4-connectivity by
/// default) share it; otherwise it becomes ungrouped. Single pass against
/// the pre-refinement labels.
SegmentationMap refine(const SegmentationMap& seg, const Image& f,
                       bool eight_neighbors = false);

/// Median gray level of each non-empty group over its grouped pixels; the
/// even-cardinality median is the mean of the two central order statistics.
SegmentationMap group_medians(const SegmentationMap& seg, const Image& f);

/// Grouped pixels take their group median, ungrouped pixels keep f.
Image build_fseg(const SegmentationMap& seg, const Image& f);

/// One global-constraint update at (1-based) iteration i:
/// segment into floor(i / n_c) + 2 groups (or the configured override),
/// refine, take medians, and move grouped pixels to
/// (1 - beta) * f + beta * median. Ungrouped pixels are bit-identical to
/// the input. A degenerate (constant) image is returned unchanged.
Image global_update(const Image& f, int iteration, const ReconConfig& cfg);

/// Group count the schedule assigns at iteration i.
int scheduled_group_count(int iteration, const ReconConfig& cfg);

/// Labels rendered as an 8-bit image for debugging: group k maps to
/// round(255 * (k + 1) / n_groups), ungrouped pixels to 0.
Image segmentation_to_image(const SegmentationMap& seg);

} // namespace tomoseg
