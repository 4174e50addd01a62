// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run a subset with --only N[,M...].
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tomoseg/geometry.hpp"
#include "tomoseg/globalseg.hpp"
#include "tomoseg/harness.hpp"
#include "tomoseg/io.hpp"
#include "tomoseg/regularizers.hpp"
#include "tomoseg/simulate.hpp"
#include "tomoseg/solver.hpp"

using namespace tomoseg;

namespace {

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;
    std::function<bool(std::string&)> run;
};

bool check(bool ok, const std::string& what, std::string& detail) {
    if (!ok) detail += (detail.empty() ? "" : "; ") + what;
    return ok;
}

// ---------------------------------------------------------------- criterion 1

bool criterion_adjointness(std::string& detail) {
    std::mt19937 rng(20260809);
    std::uniform_int_distribution<int> size_d(4, 32), angles_d(1, 16);
    std::uniform_real_distribution<double> angle_d(0.0, 360.0), val_d(-1.0, 1.0);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Geometry g;
        g.image_size = size_d(rng);
        g.detector_count = Geometry::default_detector_count(g.image_size);
        const int na = angles_d(rng);
        while (static_cast<int>(g.angles_deg.size()) < na) {
            const double a = angle_d(rng);
            bool dup = false;
            for (double b : g.angles_deg) dup = dup || b == a;
            if (!dup) g.angles_deg.push_back(a);
        }
        Image f(g.image_size, g.image_size);
        for (double& v : f.data) v = val_d(rng);
        Sinogram q(na, g.detector_count);
        for (double& v : q.data) v = val_d(rng);

        const double lhs = dot(forward_project(f, g).data, q.data);
        const double rhs = dot(f.data, back_project(q, g).data);
        const double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1e-30});
        const double rel = std::fabs(lhs - rhs) / scale;
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-10;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst relative mismatch %.3g", worst);
    detail = buf;
    return ok;
}

// ---------------------------------------------------------------- criterion 2

bool criterion_gradients(std::string& detail) {
    bool ok = true;
    double worst = 0.0;
    for (RegKind kind : {RegKind::TV, RegKind::ATV, RegKind::RwATV, RegKind::QGGMRF}) {
        RegularizerParams prm;
        prm.kind = kind;
        if (kind == RegKind::ATV || kind == RegKind::RwATV) {
            prm.a = 1.0;
            prm.b = 0.3;
        }
        for (unsigned seed = 0; seed < 20; ++seed) {
            std::mt19937 rng(1000 + seed);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            Image f(8, 8);
            for (double& v : f.data) v = uni(rng);

            WeightField w;
            const WeightField* wp = nullptr;
            if (kind == RegKind::RwATV) {
                w = rwatv_update_weights(f, prm);
                wp = &w;
            }
            auto value = [&](const Image& x) {
                switch (kind) {
                    case RegKind::TV: return tv_value(x);
                    case RegKind::ATV: return atv_value(x, prm);
                    case RegKind::RwATV: return rwatv_value(x, *wp, prm);
                    case RegKind::QGGMRF: return qggmrf_value(x, prm);
                }
                return 0.0;
            };
            Image analytic = regularizer_gradient(f, prm, wp);
            const double h = 1e-6;
            double num = 0.0, den = 0.0;
            Image probe = f;
            for (std::size_t i = 0; i < f.data.size(); ++i) {
                probe.data[i] = f.data[i] + h;
                const double up = value(probe);
                probe.data[i] = f.data[i] - h;
                const double dn = value(probe);
                probe.data[i] = f.data[i];
                const double fd = (up - dn) / (2.0 * h);
                num += (analytic.data[i] - fd) * (analytic.data[i] - fd);
                den += fd * fd;
            }
            const double rel = std::sqrt(num / den);
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-4;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst relative error %.3g", worst);
    detail = buf;
    return ok;
}

// ---------------------------------------------------------------- criterion 3

std::vector<int> exhaustive_splits(const std::vector<double>& counts, int n) {
    const int bins = static_cast<int>(counts.size());
    auto score_of = [&](const std::vector<int>& splits) {
        double total = 0.0;
        int lo = 0;
        for (int k = 0; k <= static_cast<int>(splits.size()); ++k) {
            const int hi = k < static_cast<int>(splits.size()) ? splits[k] : bins;
            double w = 0.0, s = 0.0;
            for (int b = lo; b < hi; ++b) {
                w += counts[b];
                s += counts[b] * b;
            }
            if (w > 0.0) total += s * s / w;
            lo = hi;
        }
        return total;
    };
    std::vector<int> splits(n - 1), best;
    for (int k = 0; k < n - 1; ++k) splits[k] = k + 1;
    best = splits;
    double best_score = score_of(splits);
    auto advance = [&]() {
        int k = n - 2;
        while (k >= 0) {
            ++splits[k];
            if (splits[k] <= bins - (n - 1 - k)) {
                for (int j = k + 1; j < n - 1; ++j) splits[j] = splits[j - 1] + 1;
                return true;
            }
            --k;
        }
        return false;
    };
    while (advance()) {
        const double sc = score_of(splits);
        if (sc > best_score) {
            best_score = sc;
            best = splits;
        }
    }
    return best;
}

bool criterion_otsu(std::string& detail) {
    std::mt19937 rng(777);
    std::uniform_int_distribution<int> count(0, 99);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> h(64);
        for (double& v : h) v = count(rng);
        for (int n : {2, 3, 4}) {
            if (otsu_split_bins(h, n) != exhaustive_splits(h, n)) {
                detail = "mismatch at histogram " + std::to_string(trial) + ", n = " +
                         std::to_string(n);
                return false;
            }
            ++checked;
        }
    }
    detail = std::to_string(checked) + " split vectors identical";
    return true;
}

// ---------------------------------------------------------------- criterion 4

bool criterion_fig2_disk(std::string& detail) {
    const Image disk = make_disk(128, 45.0);
    const Geometry geom = Geometry::make_uniform(128, 91, 45.0, 135.0, false);
    const Sinogram g = forward_project(disk, geom);

    ReconConfig cfg;
    cfg.alpha = 1.9;
    cfg.beta = 1.0;
    cfg.n_g = 0;
    cfg.n_c = 10;
    cfg.n_stop = 1000;
    cfg.n_iter = 1000;
    cfg.data_steps = 10;
    cfg.group_count_override = 2;

    ReconResult with_global = reconstruct(g, geom, cfg, &disk);
    ReconConfig off = cfg;
    off.global_enabled = false;
    ReconResult without = reconstruct(g, geom, off, &disk);

    const double snr_on = snr_db(disk, with_global.image);
    const double snr_off = snr_db(disk, without.image);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "with global %.2f dB, without %.2f dB", snr_on, snr_off);
    detail = buf;
    bool ok = true;
    ok = check(snr_on >= 30.0, "SNR below 30 dB", detail) && ok;
    ok = check(snr_on >= snr_off + 5.0, "improvement below 5 dB", detail) && ok;
    return ok;
}

// ------------------------------------------------------- criteria 5, 6 shared

struct PairResult {
    double snr_plain = 0.0;
    double snr_global = 0.0;
};

PairResult run_pair(const Image& truth, const Geometry& geom, const Sinogram& g,
                    const ReconConfig& base) {
    PairResult out;
    ReconConfig cfg = base;
    cfg.global_enabled = false;
    out.snr_plain = snr_db(truth, reconstruct(g, geom, cfg, &truth).image);
    cfg.global_enabled = true;
    out.snr_global = snr_db(truth, reconstruct(g, geom, cfg, &truth).image);
    return out;
}

ReconConfig paper_defaults() {
    ReconConfig cfg;
    cfg.alpha = 0.2;
    cfg.beta = 0.5;
    cfg.n_g = 20;
    cfg.n_c = 50;
    cfg.n_stop = 800;
    cfg.n_iter = 1000;
    cfg.data_steps = 5;
    cfg.regularizer.kind = RegKind::TV;
    return cfg;
}

bool criterion_sparse_view(std::string& detail) {
    const Image truth = make_shepp_logan(256, true);
    const Geometry geom = Geometry::make_uniform(256, 15, 0.0, 180.0, true);
    const Sinogram g = forward_project(truth, geom);
    const PairResult r = run_pair(truth, geom, g, paper_defaults());

    char buf[96];
    std::snprintf(buf, sizeof(buf), "TV %.2f dB, TV+global %.2f dB", r.snr_plain,
                  r.snr_global);
    detail = buf;
    bool ok = true;
    ok = check(r.snr_global - r.snr_plain >= 1.0, "improvement below 1.0 dB", detail) && ok;
    ok = check(std::fabs(r.snr_plain - 14.22) <= 3.0, "TV outside 14.22 +/- 3 dB", detail) && ok;
    ok = check(std::fabs(r.snr_global - 15.81) <= 3.0, "TV+global outside 15.81 +/- 3 dB",
               detail) && ok;
    return ok;
}

bool criterion_limited_angle(std::string& detail) {
    const Image truth = make_shepp_logan(256, true);
    const Geometry geom = Geometry::make_uniform(256, 151, 15.0, 165.0, false);
    const Sinogram g = forward_project(truth, geom);
    const PairResult r = run_pair(truth, geom, g, paper_defaults());

    char buf[96];
    std::snprintf(buf, sizeof(buf), "TV %.2f dB, TV+global %.2f dB", r.snr_plain,
                  r.snr_global);
    detail = buf;
    bool ok = true;
    ok = check(r.snr_global - r.snr_plain >= 1.5, "improvement below 1.5 dB", detail) && ok;
    ok = check(std::fabs(r.snr_plain - 20.92) <= 3.0, "TV outside 20.92 +/- 3 dB", detail) && ok;
    ok = check(std::fabs(r.snr_global - 23.72) <= 3.0, "TV+global outside 23.72 +/- 3 dB",
               detail) && ok;
    return ok;
}

// ---------------------------------------------------------------- criterion 7

bool criterion_low_dose(std::string& detail) {
    Image truth = make_shepp_logan(256, true);
    for (double& v : truth.data) v *= 7.0 / 256.0; // physical attenuation scale
    const Geometry geom = Geometry::make_uniform(256, 180, 0.0, 180.0, true);
    const Sinogram clean = forward_project(truth, geom);

    std::vector<double> snr_plain, snr_global;
    for (double i0 : {1e3, 1e5, 1e7}) {
        const Sinogram g = simulate_lowdose(clean, NoiseSpec{i0, 99});
        const PairResult r = run_pair(truth, geom, g, paper_defaults());
        snr_plain.push_back(r.snr_plain);
        snr_global.push_back(r.snr_global);
    }

    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(2);
    for (std::size_t k = 0; k < snr_plain.size(); ++k)
        ss << (k ? "; " : "") << "I0=1e" << (3 + 2 * k) << ": TV " << snr_plain[k]
           << ", TV+global " << snr_global[k];
    detail = ss.str();

    bool ok = true;
    for (std::size_t k = 1; k < snr_plain.size(); ++k) {
        ok = check(snr_plain[k] >= snr_plain[k - 1], "TV not monotone in I0", detail) && ok;
        ok = check(snr_global[k] >= snr_global[k - 1], "TV+global not monotone in I0",
                   detail) && ok;
    }
    for (std::size_t k = 0; k < snr_plain.size(); ++k)
        ok = check(snr_global[k] >= snr_plain[k] - 0.2,
                   "TV+global more than 0.2 dB below TV", detail) && ok;
    return ok;
}

// ---------------------------------------------------------------- criterion 8

bool criterion_residual_monotone(std::string& detail) {
    const Image truth = make_shepp_logan(64, true);
    const Geometry geom = Geometry::make_uniform(64, 40, 0.0, 180.0, true);
    const Sinogram g = forward_project(truth, geom);

    const double sigma = operator_norm_estimate(geom, 40);
    ReconConfig cfg;
    cfg.step_mode = StepMode::Raw;
    cfg.alpha = 0.9 / (sigma * sigma);
    cfg.n_g = 0;
    cfg.global_enabled = false;
    cfg.n_iter = 200;
    cfg.n_stop = 0;
    const ReconResult res = reconstruct(g, geom, cfg);

    double worst = 0.0;
    bool ok = true;
    for (std::size_t k = 1; k < res.trace.size(); ++k) {
        const double prev = res.trace[k - 1].residual_norm;
        const double now = res.trace[k].residual_norm;
        const double rel = (now - prev) / (prev > 0.0 ? prev : 1.0);
        worst = std::max(worst, rel);
        ok = ok && now <= prev * (1.0 + 1e-9);
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "200 iterations, worst relative increase %.3g", worst);
    detail = buf;
    return ok;
}

// ---------------------------------------------------------------- criterion 9

bool criterion_determinism(std::string& detail) {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "tomoseg_acceptance_det";
    fs::remove_all(base);

    auto spec_text = [&](const std::string& out) {
        return std::string("[experiment]\nname = det\nphantom = shepp_logan\nsize = 64\n") +
               "output = " + out + "\nseed = 21\n\n" +
               "[condition]\ntype = low_dose\nviews = 45\ni0 = 1e5\nattenuation_scale = 0.08\n\n" +
               "[recon]\nalpha = 1.0\nn_iter = 60\nn_g = 4\nn_c = 20\nn_stop = 60\n\n" +
               "[variants]\ntv off\ntv on\n";
    };
    auto run_once = [&](const std::string& sub) {
        const std::string out = (base / sub).string();
        run_experiment(parse_experiment_spec_text(spec_text(out), "inline"));
        return out;
    };
    const std::string a = run_once("a");
    const std::string b = run_once("b");

    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto strip_seconds = [](const std::string& csv) {
        std::istringstream in(csv);
        std::string line, out;
        while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
        return out;
    };

    bool ok = true;
    ok = check(strip_seconds(slurp(a + "/metrics.csv")) ==
                   strip_seconds(slurp(b + "/metrics.csv")),
               "metrics differ", detail) && ok;
    for (const char* stem : {"det_tv_1e5.f32", "det_tv+global_1e5.f32"})
        ok = check(slurp(a + "/" + stem) == slurp(b + "/" + stem),
                   std::string("image differs: ") + stem, detail) && ok;
    if (ok) detail = "metrics and images bit-identical";
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strncmp(argv[i], "--only", 6) == 0) {
            const char* list = std::strchr(argv[i], '=');
            std::string s = list ? list + 1 : (i + 1 < argc ? argv[++i] : "");
            std::istringstream ss(s);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.push_back(std::stoi(tok));
        }
    }

    std::vector<Criterion> criteria = {
        {1, "adjoint identity, 100 random instances", 10.0, criterion_adjointness},
        {2, "regularizer gradients vs finite differences", 30.0, criterion_gradients},
        {3, "multi-level Otsu DP vs exhaustive search", 10.0, criterion_otsu},
        {4, "limited-angle binary disk with 2-group constraint", 300.0, criterion_fig2_disk},
        {5, "sparse-view improvement, 15 views", 900.0, criterion_sparse_view},
        {6, "limited-angle improvement, 15-165 degrees", 900.0, criterion_limited_angle},
        {7, "low-dose monotonicity over I0", 1800.0, criterion_low_dose},
        {8, "raw-step residual monotonicity", 120.0, criterion_residual_monotone},
        {9, "experiment determinism", 120.0, criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end())
            continue;
        std::string detail;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (seconds > c.time_limit_s) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + std::string("over time limit");
        }
        std::printf("[%s] criterion %d: %s (%.1f s%s%s)\n", ok ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), seconds, detail.empty() ? "" : " -- ",
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
