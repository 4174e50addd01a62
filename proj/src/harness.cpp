#include "tomoseg/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tomoseg/geometry.hpp"
#include "tomoseg/io.hpp"
#include "tomoseg/simulate.hpp"
#include "tomoseg/solver.hpp"

namespace tomoseg {

namespace {

double snr_db_impl(const std::vector<double>& ref, const std::vector<double>& est) {
    if (ref.size() != est.size())
        throw std::invalid_argument("snr_db: dimension mismatch");
    double ref_sq = 0.0, err_sq = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ref_sq += ref[i] * ref[i];
        const double d = ref[i] - est[i];
        err_sq += d * d;
    }
    if (err_sq == 0.0) return kSnrCapDb;
    return 10.0 * std::log10(ref_sq / err_sq);
}

} // namespace

double snr_db(const Image& reference, const Image& estimate) {
    if (reference.width != estimate.width || reference.height != estimate.height)
        throw std::invalid_argument("snr_db: dimension mismatch");
    return snr_db_impl(reference.data, estimate.data);
}

double snr_db(const Sinogram& reference, const Sinogram& estimate) {
    if (reference.n_angles != estimate.n_angles ||
        reference.n_detectors != estimate.n_detectors)
        throw std::invalid_argument("snr_db: dimension mismatch");
    return snr_db_impl(reference.data, estimate.data);
}

std::string ExperimentVariant::label() const {
    std::string s = reg_kind_name(kind);
    if (global_on) s += "+global";
    return s;
}

void ExperimentSpec::validate() const {
    if (condition_values.empty() && ranges.empty())
        throw std::invalid_argument("ExperimentSpec: no condition values");
    if (condition == ConditionType::SparseView)
        for (double v : condition_values)
            if (v < 1.0)
                throw std::invalid_argument("ExperimentSpec: sparse_view needs n_views >= 1");
    if (condition == ConditionType::LimitedAngle) {
        for (double w : condition_values)
            if (!(w > 0.0))
                throw std::invalid_argument("ExperimentSpec: limited_angle width must be > 0");
        for (auto [s, e] : ranges)
            if (!(s < e))
                throw std::invalid_argument("ExperimentSpec: limited_angle needs start < end");
    }
    if (condition == ConditionType::LowDose) {
        for (double v : condition_values)
            if (!(v > 0.0))
                throw std::invalid_argument("ExperimentSpec: low_dose needs i0 > 0");
        if (lowdose_views < 1)
            throw std::invalid_argument("ExperimentSpec: low_dose needs views >= 1");
    }
    if (variants.empty()) return; // zero rows is a valid (empty) experiment
    recon.validate();
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("experiment spec: bad numeric value '" + s + "' for " + key);
    }
}

} // namespace

ExperimentSpec parse_experiment_spec_text(const std::string& text, const std::string& origin) {
    ExperimentSpec spec;
    spec.recon = ReconConfig{}; // paper-protocol defaults
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    bool n_stop_set = false;

    auto fail = [&](const std::string& msg) {
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }

        if (section == "variants") {
            const auto toks = split_ws(line);
            if (toks.size() != 2 || (toks[1] != "on" && toks[1] != "off"))
                fail("variant lines are '<regularizer> on|off'");
            spec.variants.push_back({reg_kind_from_name(toks[0]), toks[1] == "on"});
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (section == "experiment") {
            if (key == "name") spec.name = val;
            else if (key == "phantom" || key == "input") spec.phantom = val;
            else if (key == "size") spec.size = static_cast<int>(parse_double(val, key));
            else if (key == "disk_radius") spec.disk_radius_px = parse_double(val, key);
            else if (key == "modified_contrast") spec.modified_contrast = val == "true" || val == "1";
            else if (key == "output") spec.output_dir = val;
            else if (key == "seed") spec.seed = static_cast<std::uint64_t>(parse_double(val, key));
            else if (key == "detector_pitch") spec.detector_pitch = parse_double(val, key);
            else fail("unknown key '" + key + "' in [experiment]");
        } else if (section == "condition") {
            if (key == "type") {
                if (val == "sparse_view") spec.condition = ConditionType::SparseView;
                else if (val == "limited_angle") spec.condition = ConditionType::LimitedAngle;
                else if (val == "low_dose") spec.condition = ConditionType::LowDose;
                else fail("unknown condition type '" + val + "'");
            } else if (key == "views") {
                if (spec.condition == ConditionType::LowDose)
                    spec.lowdose_views = static_cast<int>(parse_double(val, key));
                else
                    for (const auto& t : split_ws(val))
                        spec.condition_values.push_back(parse_double(t, key));
            } else if (key == "widths" || key == "i0") {
                for (const auto& t : split_ws(val))
                    spec.condition_values.push_back(parse_double(t, key));
            } else if (key == "ranges") {
                for (const auto& t : split_ws(val)) {
                    const auto colon = t.find(':');
                    if (colon == std::string::npos) fail("ranges are 'start:end'");
                    spec.ranges.emplace_back(parse_double(t.substr(0, colon), key),
                                             parse_double(t.substr(colon + 1), key));
                }
            } else if (key == "attenuation_scale") {
                spec.attenuation_scale = parse_double(val, key);
            } else {
                fail("unknown key '" + key + "' in [condition]");
            }
        } else if (section == "recon") {
            ReconConfig& r = spec.recon;
            if (key == "alpha") r.alpha = parse_double(val, key);
            else if (key == "beta") r.beta = parse_double(val, key);
            else if (key == "beta_local") r.beta_local = parse_double(val, key);
            else if (key == "beta_global") r.beta_global = parse_double(val, key);
            else if (key == "n_g") r.n_g = static_cast<int>(parse_double(val, key));
            else if (key == "n_c") r.n_c = static_cast<int>(parse_double(val, key));
            else if (key == "n_stop") { r.n_stop = static_cast<int>(parse_double(val, key)); n_stop_set = true; }
            else if (key == "n_iter") r.n_iter = static_cast<int>(parse_double(val, key));
            else if (key == "data_steps") r.data_steps = static_cast<int>(parse_double(val, key));
            else if (key == "n_groups") r.group_count_override = static_cast<int>(parse_double(val, key));
            else if (key == "step_mode") {
                if (val == "normalized") r.step_mode = StepMode::Normalized;
                else if (val == "raw") r.step_mode = StepMode::Raw;
                else fail("step_mode is 'normalized' or 'raw'");
            }
            else if (key == "a") r.regularizer.a = parse_double(val, key);
            else if (key == "b") r.regularizer.b = parse_double(val, key);
            else if (key == "epsilon") r.regularizer.epsilon = parse_double(val, key);
            else if (key == "p") r.regularizer.p = parse_double(val, key);
            else if (key == "q") r.regularizer.q = parse_double(val, key);
            else if (key == "c") r.regularizer.c = parse_double(val, key);
            else if (key == "lambda") r.regularizer.lambda_weight = parse_double(val, key);
            else fail("unknown key '" + key + "' in [recon]");
        } else {
            fail("line outside a known section");
        }
    }

    if (!n_stop_set && spec.recon.n_stop > spec.recon.n_iter)
        spec.recon.n_stop = spec.recon.n_iter;
    spec.validate();
    return spec;
}

ExperimentSpec parse_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("experiment spec: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment_spec_text(ss.str(), path);
}

namespace {

Image experiment_ground_truth(const ExperimentSpec& spec) {
    if (spec.phantom == "shepp_logan")
        return make_shepp_logan(spec.size, spec.modified_contrast);
    if (spec.phantom == "disk") {
        const double r = spec.disk_radius_px > 0.0 ? spec.disk_radius_px : 0.35 * spec.size;
        return make_disk(spec.size, r);
    }
    Image img = load_grayscale(spec.phantom);
    if (img.width != img.height)
        throw std::runtime_error("experiment: input image must be square, got " +
                                 std::to_string(img.width) + "x" + std::to_string(img.height));
    return img;
}

std::string format_param(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        // Powers of ten print compactly (1e5), everything else as an integer.
        const double l = std::log10(v);
        if (v >= 1e4 && l == std::floor(l))
            return "1e" + std::to_string(static_cast<int>(l));
        std::ostringstream ss;
        ss << static_cast<long long>(v);
        return ss.str();
    }
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

struct Case {
    Geometry geom;
    std::string param;
    double i0 = 0.0; // > 0 for low dose
};

std::vector<Case> build_cases(const ExperimentSpec& spec) {
    std::vector<Case> cases;
    auto apply_detector = [&](Geometry& geom) {
        if (spec.detector_pitch != 1.0) {
            geom.detector_pitch = spec.detector_pitch;
            geom.detector_count = static_cast<int>(
                std::ceil(std::sqrt(2.0) * spec.size / spec.detector_pitch));
        }
    };
    switch (spec.condition) {
        case ConditionType::SparseView:
            for (double v : spec.condition_values) {
                Case c;
                c.geom = Geometry::make_uniform(spec.size, static_cast<int>(v), 0.0, 180.0, true);
                apply_detector(c.geom);
                c.param = format_param(v);
                cases.push_back(std::move(c));
            }
            break;
        case ConditionType::LimitedAngle: {
            auto add_range = [&](double start, double end, const std::string& param) {
                Case c;
                const int views = static_cast<int>(std::lround(end - start)) + 1;
                c.geom = Geometry::make_uniform(spec.size, views, start, end, false);
                apply_detector(c.geom);
                c.param = param;
                cases.push_back(std::move(c));
            };
            for (double w : spec.condition_values)
                add_range(90.0 - w / 2.0, 90.0 + w / 2.0, format_param(w));
            for (auto [s, e] : spec.ranges)
                add_range(s, e, format_param(s) + "-" + format_param(e));
            break;
        }
        case ConditionType::LowDose:
            for (double i0 : spec.condition_values) {
                Case c;
                c.geom = Geometry::make_uniform(spec.size, spec.lowdose_views, 0.0, 180.0, true);
                apply_detector(c.geom);
                c.param = format_param(i0);
                c.i0 = i0;
                cases.push_back(std::move(c));
            }
            break;
    }
    return cases;
}

void write_trace_csv(const std::vector<IterationRecord>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("experiment: cannot open " + path);
    out << "iteration,residual_norm,snr_db,update_magnitude,n_groups\n";
    char buf[160];
    for (const auto& r : trace) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,", r.iteration, r.residual_norm);
        out << buf;
        if (r.snr_db) {
            std::snprintf(buf, sizeof(buf), "%.6f", *r.snr_db);
            out << buf;
        }
        out << ',';
        std::snprintf(buf, sizeof(buf), "%.9g,", r.update_magnitude);
        out << buf;
        if (r.n_groups) out << *r.n_groups;
        out << '\n';
    }
}

} // namespace

std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<MetricsRow> rows;
    if (spec.variants.empty()) return rows;

    std::filesystem::create_directories(spec.output_dir);
    const Image truth_raw = experiment_ground_truth(spec);
    const std::vector<Case> cases = build_cases(spec);

    std::ofstream csv(spec.output_dir + "/metrics.csv");
    if (!csv)
        throw std::runtime_error("experiment: cannot open " + spec.output_dir + "/metrics.csv");
    csv << "experiment,variant,param,snr_db,seconds\n";

    const double atten =
        spec.attenuation_scale > 0.0 ? spec.attenuation_scale : 7.0 / spec.size;
    for (const Case& cs : cases) {
        Image truth = truth_raw;
        if (cs.i0 > 0.0)
            for (double& v : truth.data) v *= atten;

        if (truth.width != cs.geom.image_size) {
            std::cerr << "experiment: phantom size " << truth.width
                      << " does not match geometry " << cs.geom.image_size << "\n";
            continue;
        }

        Sinogram g = forward_project(truth, cs.geom);
        if (cs.i0 > 0.0)
            g = simulate_lowdose(g, NoiseSpec{cs.i0, spec.seed});

        for (const ExperimentVariant& variant : spec.variants) {
            MetricsRow row;
            row.experiment = spec.name;
            row.variant = variant.label();
            row.param = cs.param;
            const std::string stem =
                spec.output_dir + "/" + spec.name + "_" + row.variant + "_" + cs.param;
            try {
                ReconConfig cfg = spec.recon;
                cfg.regularizer.kind = variant.kind;
                cfg.global_enabled = variant.global_on;
                cfg.rng_seed = spec.seed;

                const auto t0 = std::chrono::steady_clock::now();
                ReconResult res = reconstruct(g, cs.geom, cfg, &truth);
                const auto t1 = std::chrono::steady_clock::now();
                row.seconds = std::chrono::duration<double>(t1 - t0).count();
                row.snr_db = snr_db(truth, res.image);

                save_raw_f32(res.image, stem + ".f32");
                save_pgm_preview(res.image, stem + ".pgm");
                Image err = res.image;
                for (std::size_t i = 0; i < err.data.size(); ++i)
                    err.data[i] = std::fabs(err.data[i] - truth.data[i]);
                save_pgm_preview(err, stem + "_err.pgm", 0.0, 0.05);
                row.trace_path = stem + "_trace.csv";
                write_trace_csv(res.trace, row.trace_path);

                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.6f", row.snr_db);
                csv << row.experiment << ',' << row.variant << ',' << row.param << ',' << buf
                    << ',';
                std::snprintf(buf, sizeof(buf), "%.3f", row.seconds);
                csv << buf << '\n';
                csv.flush();
            } catch (const std::exception& e) {
                row.errored = true;
                row.error = e.what();
                std::cerr << "experiment: row " << row.variant << "/" << cs.param
                          << " failed: " << e.what() << "\n";
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace tomoseg
