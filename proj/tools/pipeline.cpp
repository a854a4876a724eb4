#include "pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cawm/image_io.hpp"

namespace fs = std::filesystem;

namespace cawm::pipeline {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

std::string fmt_float(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// Plain value copy of a spatial window; inputs are leaves, no graph needed.
Tensor<float> crop_at(const Tensor<float>& img, int64_t h0, int64_t w0, int64_t size) {
    const Shape s = img.shape();
    if (h0 < 0 || w0 < 0 || h0 + size > s.h || w0 + size > s.w)
        throw UsageError("crop window out of bounds");
    Tensor<float> out = Tensor<float>::zeros({s.b, s.c, size, size});
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t c = 0; c < s.c; ++c)
            for (int64_t h = 0; h < size; ++h)
                for (int64_t w = 0; w < size; ++w)
                    out.at(b, c, h, w) = img.at(b, c, h0 + h, w0 + w);
    return out;
}

int64_t crop_for_step(const std::vector<CropStage>& schedule, int64_t step) {
    int64_t crop = schedule.front().crop;
    int64_t best = INT64_MIN;
    for (const auto& st : schedule)
        if (st.step_threshold <= step && st.step_threshold >= best) {
            best = st.step_threshold;
            crop = st.crop;
        }
    return crop;
}

}  // namespace

void RunConfig::validate() const {
    if (preset != "tiny" && preset != "paper")
        throw ConfigError("config key 'preset': expected tiny|paper, got '" + preset +
                          "'");
    if (!(lr > 0)) throw ConfigError("config key 'lr': must be positive");
    if (steps < 0) throw ConfigError("config key 'steps': must be >= 0");
    if (crop_schedule.empty())
        throw ConfigError("config key 'crop_schedule': must not be empty");
    for (const auto& st : crop_schedule)
        if (st.crop < 16 || st.crop % 2 != 0)
            throw ConfigError("config key 'crop_schedule': crop sizes must be even and"
                              " >= 16, got " + std::to_string(st.crop));
}

NetConfig RunConfig::net_config() const {
    return preset == "paper" ? NetConfig::paper_preset() : NetConfig::tiny_preset();
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    std::vector<double> severities;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "preset") {
                cfg.preset = val;
            } else if (key == "seed") {
                cfg.seed = std::stoull(val);
            } else if (key == "lr") {
                cfg.lr = std::stod(val);
            } else if (key == "steps") {
                cfg.steps = std::stoll(val);
            } else if (key == "crop_schedule") {
                cfg.crop_schedule.clear();
                for (const auto& part : split(val, ',')) {
                    const auto colon = part.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError("expected threshold:size");
                    cfg.crop_schedule.push_back(
                        {std::stoll(part.substr(0, colon)),
                         std::stoll(part.substr(colon + 1))});
                }
            } else if (key == "data_dir") {
                cfg.data_dir = val;
            } else if (key == "out_dir") {
                cfg.out_dir = val;
            } else if (key == "kinds") {
                cfg.degradation.kinds.clear();
                for (const auto& part : split(val, ','))
                    cfg.degradation.kinds.push_back(weather_kind_from_string(part));
            } else if (key == "severity") {
                severities.clear();
                for (const auto& part : split(val, ','))
                    severities.push_back(std::stod(part));
            } else if (key == "degrade_seed") {
                cfg.degradation.seed = std::stoull(val);
            } else {
                throw ConfigError("unknown config key '" + key + "' in " + path + ":" +
                                  std::to_string(lineno));
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("config key '" + key + "': malformed value '" + val + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError("config key '" + key + "': value out of range '" + val +
                              "'");
        }
    }
    if (!cfg.degradation.kinds.empty()) {
        if (severities.empty()) severities.assign(cfg.degradation.kinds.size(), 0.5);
        if (severities.size() == 1)
            severities.assign(cfg.degradation.kinds.size(), severities[0]);
        cfg.degradation.severities = severities;
        cfg.degradation.validate();
    }
    cfg.validate();
    return cfg;
}

Model build_model(const NetConfig& cfg, uint64_t seed) {
    Model m;
    Rng rng(seed);
    m.net = std::make_unique<CawmNet<float>>(m.params, cfg, rng);
    m.alpha = m.params.add("loss.alpha", Tensor<float>::scalar(0.5f));
    return m;
}

void run_synth(const std::string& out_dir, int64_t n, const DegradationSpec& spec,
               int64_t size) {
    spec.validate();
    fs::create_directories(out_dir);
    for (int64_t i = 0; i < n; ++i) {
        const uint64_t pair_seed = spec.seed + static_cast<uint64_t>(i) * 10;
        Tensor<float> clean = synth_clean_image(size, size, pair_seed);
        Tensor<float> ir = synth_ir_image(clean, pair_seed + 5);
        DegradationSpec local = spec;
        local.seed = pair_seed;
        Tensor<float> degraded = apply_compound(clean, local);
        char name[32];
        std::snprintf(name, sizeof(name), "pair%04lld", static_cast<long long>(i));
        const fs::path base = fs::path(out_dir) / name;
        save_png(clean, base.string() + "_clean_vi.png");
        save_png(degraded, base.string() + "_degraded_vi.png");
        save_png(ir, base.string() + "_ir.png");
    }
}

std::vector<Triple> load_triples(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("data dir does not exist: " + dir);
    std::vector<std::string> names;
    const std::string suffix = "_clean_vi.png";
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string fn = e.path().filename().string();
        if (fn.size() > suffix.size() &&
            fn.compare(fn.size() - suffix.size(), suffix.size(), suffix) == 0)
            names.push_back(fn.substr(0, fn.size() - suffix.size()));
    }
    std::sort(names.begin(), names.end());
    if (names.empty())
        throw IoError("no *_clean_vi.png triples found in data dir: " + dir);
    std::vector<Triple> out;
    for (const auto& nm : names) {
        Triple t;
        t.name = nm;
        const fs::path base = fs::path(dir) / nm;
        t.clean_vi = load_png(base.string() + "_clean_vi.png");
        t.degraded_vi = load_png(base.string() + "_degraded_vi.png");
        t.ir = load_png(base.string() + "_ir.png");
        if (t.clean_vi.shape().c != 3 || t.degraded_vi.shape().c != 3)
            throw UsageError("triple '" + nm + "': visible images must be RGB");
        if (t.ir.shape().c != 1)
            throw UsageError("triple '" + nm + "': ir image must be grayscale");
        out.push_back(std::move(t));
    }
    return out;
}

std::string format_loss_line(int64_t step, const LossReport<float>& rep) {
    std::string s = "{\"step\":" + std::to_string(step);
    s += ",\"total\":" + fmt_float(rep.total);
    s += ",\"wavelet\":" + fmt_float(rep.wavelet);
    s += ",\"intensity\":" + fmt_float(rep.intensity);
    s += ",\"color\":" + fmt_float(rep.color);
    s += ",\"perceptual\":" + fmt_float(rep.perceptual);
    s += ",\"gradient\":" + fmt_float(rep.gradient);
    s += ",\"ssim\":" + fmt_float(rep.ssim);
    s += ",\"alpha\":" + fmt_float(rep.alpha);
    s += "}";
    return s;
}

TrainResult run_train(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    if (cfg.steps < 1) throw ConfigError("config key 'steps': training needs >= 1 step");
    const NetConfig net_cfg = cfg.net_config();
    Model m = build_model(net_cfg, cfg.seed);

    std::vector<Triple> triples;
    if (cfg.data_dir.empty()) {
        // Self-contained single pair at the largest scheduled crop size.
        int64_t size = 0;
        for (const auto& st : cfg.crop_schedule) size = std::max(size, st.crop);
        DegradationSpec spec = cfg.degradation;
        if (spec.kinds.empty()) {
            spec.kinds = {WeatherKind::Haze, WeatherKind::Rain, WeatherKind::Snow};
            spec.severities = {0.5, 0.5, 0.5};
        }
        spec.seed = cfg.seed + 900;
        Triple t;
        t.name = "inmemory";
        t.clean_vi = synth_clean_image(size, size, cfg.seed + 800);
        t.ir = synth_ir_image(t.clean_vi, cfg.seed + 801);
        t.degraded_vi = apply_compound(t.clean_vi, spec);
        triples.push_back(std::move(t));
    } else {
        triples = load_triples(cfg.data_dir);
    }

    AdamState<float> opt;
    opt.lr = static_cast<float>(cfg.lr);
    FeatureExtractor<float> extractor = make_random_pyramid_extractor<float>();
    Rng crop_rng(cfg.seed ^ 0x517cc1b727220a95ull);

    TrainResult result;
    for (int64_t step = 1; step <= cfg.steps; ++step) {
        const Triple& t = triples[static_cast<size_t>((step - 1) %
                                                      static_cast<int64_t>(triples.size()))];
        const int64_t crop = crop_for_step(cfg.crop_schedule, step);
        const Shape s = t.clean_vi.shape();
        if (s.h < crop || s.w < crop)
            throw ConfigError("crop size " + std::to_string(crop) +
                              " exceeds image size " + s.str() + " for '" + t.name + "'");
        const int64_t h0 = s.h == crop ? 0 : crop_rng.uniform_int(0, s.h - crop);
        const int64_t w0 = s.w == crop ? 0 : crop_rng.uniform_int(0, s.w - crop);
        Tensor<float> clean = crop_at(t.clean_vi, h0, w0, crop);
        Tensor<float> degraded = crop_at(t.degraded_vi, h0, w0, crop);
        Tensor<float> ir = crop_at(t.ir, h0, w0, crop);

        Tensor<float> fused = m.net->forward(degraded, ir);
        auto [total, rep] = total_loss(fused, clean, ir, m.alpha, extractor);
        backward(total);
        if (m.alpha.grad().size() == 1 && m.alpha.grad()[0] != 0.0f)
            result.alpha_grad_seen = true;

        const std::string line = format_loss_line(step, rep);
        log << line << "\n";
        result.log_lines.push_back(line);
        if (step == 1) result.first_total = rep.total;
        result.final_total = rep.total;

        adam_step(m.params, opt);
    }
    result.final_alpha = m.alpha.item();

    {
        Tensor<float> fused = fuse_pair(m, triples[0].degraded_vi, triples[0].ir);
        result.final_ssim = ssim(fused, triples[0].clean_vi.detach()).item();
    }

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        const std::string path = (fs::path(cfg.out_dir) / "checkpoint.cawm").string();
        save_checkpoint(path, m.params, net_cfg, m.alpha.item());
        result.checkpoint_path = path;
    }
    return result;
}

Model load_model(const std::string& ckpt_path) {
    LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
    Model m = build_model(ckpt.config, 0);
    restore_params(m.params, ckpt);
    return m;
}

Tensor<float> fuse_pair(Model& m, const Tensor<float>& vi, const Tensor<float>& ir) {
    // Inference only: drop requires_grad so no tape is built.
    Tensor<float> v = vi.detach();
    Tensor<float> i = ir.detach();
    for (auto& [name, t] : m.params) t.set_requires_grad(false);
    Tensor<float> fused = m.net->forward(v, i);
    for (auto& [name, t] : m.params) t.set_requires_grad(true);
    return fused;
}

Tensor<float> run_fuse(const std::string& ckpt_path, const std::string& vi_path,
                       const std::string& ir_path, const std::string& out_path) {
    Model m = load_model(ckpt_path);
    Tensor<float> vi = load_png(vi_path);
    if (vi.shape().c != 3)
        throw UsageError("fuse: visible image must be RGB: " + vi_path);
    Tensor<float> ir = load_png(ir_path);
    if (ir.shape().c != 1)
        throw UsageError("fuse: infrared image must be grayscale: " + ir_path);
    Tensor<float> fused = fuse_pair(m, vi, ir);
    if (!out_path.empty()) save_png(fused, out_path);
    return fused;
}

std::string run_eval(const std::string& ckpt_path, const std::string& data_dir,
                     const std::string& report_path) {
    Model m = load_model(ckpt_path);
    std::vector<Triple> triples = load_triples(data_dir);
    std::string report = "{\"pairs\":[";
    double sum_ssim = 0, sum_qmi = 0, sum_qabf = 0;
    for (size_t i = 0; i < triples.size(); ++i) {
        const Triple& t = triples[i];
        Tensor<float> fused = fuse_pair(m, t.degraded_vi, t.ir);
        MetricReport r = compute_metrics(fused, t.clean_vi, t.ir);
        sum_ssim += r.ssim;
        sum_qmi += r.q_mi;
        sum_qabf += r.q_abf;
        if (i) report += ",";
        report += "{\"name\":\"" + t.name + "\",\"ssim\":" + fmt_float(r.ssim) +
                  ",\"q_mi\":" + fmt_float(r.q_mi) +
                  ",\"q_abf\":" + fmt_float(r.q_abf) + "}";
    }
    const double n = static_cast<double>(triples.size());
    report += "],\"means\":{\"ssim\":" + fmt_float(sum_ssim / n) +
              ",\"q_mi\":" + fmt_float(sum_qmi / n) +
              ",\"q_abf\":" + fmt_float(sum_qabf / n) + "}}";
    if (!report_path.empty()) {
        std::ofstream os(report_path);
        if (!os) throw IoError("cannot open report for writing: " + report_path);
        os << report << "\n";
    }
    return report;
}

}  // namespace cawm::pipeline
