#pragma once

// The user-facing pipeline: run configuration, synthetic data generation,
// the training loop with line-delimited loss logging, single-pair fusion,
// metric reports, and the self-check entry points. Kept as a library so the
// CLI and the acceptance tests share one implementation.

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "cawm/checkpoint.hpp"
#include "cawm/degrade.hpp"
#include "cawm/losses.hpp"
#include "cawm/metrics.hpp"
#include "cawm/network.hpp"
#include "cawm/optim.hpp"
#include "cawm/tensor.hpp"

namespace cawm::pipeline {

struct CropStage {
    int64_t step_threshold = 0;  // first step (1-based) at which this size applies
    int64_t crop = 32;
};

struct RunConfig {
    std::string preset = "tiny";  // "tiny" | "paper"
    uint64_t seed = 0;
    double lr = 1e-4;
    int64_t steps = 0;
    std::vector<CropStage> crop_schedule = {{0, 32}};
    std::string data_dir;  // empty -> one in-memory synthetic pair
    std::string out_dir;
    DegradationSpec degradation;

    void validate() const;
    NetConfig net_config() const;
    static RunConfig from_file(const std::string& path);
};

// The network plus its parameter store and the learnable loss weight. The
// loss weight is registered last under "loss.alpha" so checkpoints cover it.
struct Model {
    ParamStore<float> params;
    std::unique_ptr<CawmNet<float>> net;
    Tensor<float> alpha;
};

Model build_model(const NetConfig& cfg, uint64_t seed);

// One training example; ir and clean_vi are the supervision targets, the
// degraded visible image is the network input.
struct Triple {
    std::string name;
    Tensor<float> clean_vi;    // (1,3,H,W)
    Tensor<float> degraded_vi; // (1,3,H,W)
    Tensor<float> ir;          // (1,1,H,W)
};

// Writes n triples (<name>_clean_vi.png / _degraded_vi.png / _ir.png).
void run_synth(const std::string& out_dir, int64_t n, const DegradationSpec& spec,
               int64_t size = 64);

// Triples found in dir, sorted by name.
std::vector<Triple> load_triples(const std::string& dir);

std::string format_loss_line(int64_t step, const LossReport<float>& rep);

struct TrainResult {
    std::vector<std::string> log_lines;
    std::string checkpoint_path;  // empty if out_dir was empty
    float first_total = 0, final_total = 0;
    float final_alpha = 0;
    bool alpha_grad_seen = false;  // a nonzero alpha gradient occurred
    double final_ssim = 0;  // SSIM(fused, clean_vi) on the first triple
};

// Runs the loop (forward -> total_loss -> backward -> adam_step), writing
// one structured log line per step to `log`.
TrainResult run_train(const RunConfig& cfg, std::ostream& log);

// Loads the checkpoint, rebuilds the model, and returns it.
Model load_model(const std::string& ckpt_path);

Tensor<float> fuse_pair(Model& m, const Tensor<float>& vi, const Tensor<float>& ir);

// fuse subcommand body; returns the fused image (also written to out_path).
Tensor<float> run_fuse(const std::string& ckpt_path, const std::string& vi_path,
                       const std::string& ir_path, const std::string& out_path);

// eval subcommand body; returns the JSON report text (also written to
// report_path when non-empty).
std::string run_eval(const std::string& ckpt_path, const std::string& data_dir,
                     const std::string& report_path);

}  // namespace cawm::pipeline
