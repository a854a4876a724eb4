// Command-line surface: synth | train | fuse | eval | gradcheck | selftest.
// Exit codes: 0 success, 1 internal failure or failed check suite,
// 2 usage error, 3 config error, 4 I/O error, 5 unsupported image format,
// 6 corrupt checkpoint, 7 domain error, 8 degenerate input.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "cawm/error.hpp"
#include "cawm/gradcheck_suite.hpp"
#include "cawm/selftest.hpp"
#include "pipeline.hpp"

namespace {

int dispatch(int argc, char** argv) {
    CLI::App app{"Infrared-visible fusion with compound weather restoration"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic degraded triples");
    std::string synth_out;
    int64_t synth_n = 4;
    std::vector<std::string> synth_kinds = {"haze", "rain", "snow"};
    std::vector<double> synth_sev = {0.5};
    uint64_t synth_seed = 0;
    int64_t synth_size = 64;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--n", synth_n, "Number of triples");
    synth->add_option("--kinds", synth_kinds, "Degradations: haze rain snow");
    synth->add_option("--severity", synth_sev, "Severity in [0,1], one value or one per kind");
    synth->add_option("--seed", synth_seed, "Base seed");
    synth->add_option("--size", synth_size, "Image side length");

    // train
    auto* train = app.add_subcommand("train", "Run the training loop");
    std::string train_config;
    train->add_option("--config", train_config, "key=value config file")->required();

    // fuse
    auto* fuse = app.add_subcommand("fuse", "Fuse one visible/infrared pair");
    std::string fuse_ckpt, fuse_vi, fuse_ir, fuse_out;
    fuse->add_option("--ckpt", fuse_ckpt, "Checkpoint path")->required();
    fuse->add_option("--vi", fuse_vi, "Visible PNG")->required();
    fuse->add_option("--ir", fuse_ir, "Infrared PNG")->required();
    fuse->add_option("--out", fuse_out, "Fused PNG output")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint over a data dir");
    std::string eval_ckpt, eval_data, eval_report;
    eval->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
    eval->add_option("--data", eval_data, "Directory of triples")->required();
    eval->add_option("--report", eval_report, "JSON report output path")->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
    auto* selftest = app.add_subcommand("selftest", "Invariant suites");

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        cawm::DegradationSpec spec;
        for (const auto& k : synth_kinds)
            spec.kinds.push_back(cawm::weather_kind_from_string(k));
        if (synth_sev.size() == 1)
            spec.severities.assign(spec.kinds.size(), synth_sev[0]);
        else
            spec.severities = synth_sev;
        spec.seed = synth_seed;
        cawm::pipeline::run_synth(synth_out, synth_n, spec, synth_size);
        std::cout << "wrote " << synth_n << " triples to " << synth_out << "\n";
        return 0;
    }
    if (train->parsed()) {
        auto cfg = cawm::pipeline::RunConfig::from_file(train_config);
        auto result = cawm::pipeline::run_train(cfg, std::cout);
        if (!result.checkpoint_path.empty())
            std::cerr << "checkpoint: " << result.checkpoint_path << "\n";
        return 0;
    }
    if (fuse->parsed()) {
        cawm::pipeline::run_fuse(fuse_ckpt, fuse_vi, fuse_ir, fuse_out);
        std::cout << "wrote " << fuse_out << "\n";
        return 0;
    }
    if (eval->parsed()) {
        std::cout << cawm::pipeline::run_eval(eval_ckpt, eval_data, eval_report) << "\n";
        return 0;
    }
    if (gradcheck->parsed()) return cawm::run_gradcheck_suite(std::cout) ? 0 : 1;
    if (selftest->parsed()) return cawm::run_selftest(std::cout) ? 0 : 1;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const cawm::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const cawm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const cawm::UnsupportedFormatError& e) {
        std::cerr << "unsupported format: " << e.what() << "\n";
        return 5;
    } catch (const cawm::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const cawm::CorruptCheckpointError& e) {
        std::cerr << "corrupt checkpoint: " << e.what() << "\n";
        return 6;
    } catch (const cawm::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 7;
    } catch (const cawm::DegenerateInputError& e) {
        std::cerr << "degenerate input: " << e.what() << "\n";
        return 8;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
