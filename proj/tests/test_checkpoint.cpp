#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cawm/checkpoint.hpp"
#include "cawm/random.hpp"

using namespace cawm;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

std::vector<char> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

ParamStore<float> make_store(uint64_t seed) {
    ParamStore<float> ps;
    Rng rng(seed);
    Tensor<float> a = Tensor<float>::zeros({1, 4, 3, 3});
    Tensor<float> b = Tensor<float>::zeros({1, 4, 1, 1});
    for (auto& v : a.data()) v = static_cast<float>(rng.normal(0, 1));
    for (auto& v : b.data()) v = static_cast<float>(rng.normal(0, 1));
    ps.add("stem.weight", a);
    ps.add("stem.bias", b);
    return ps;
}

}  // namespace

TEST_CASE("save -> load -> save is byte-identical and value-exact") {
    const std::string p1 = tmp_path("ckpt_rt_1.cawm");
    const std::string p2 = tmp_path("ckpt_rt_2.cawm");
    ParamStore<float> ps = make_store(601);
    NetConfig cfg = NetConfig::tiny_preset();
    save_checkpoint(p1, ps, cfg, 0.625f);

    LoadedCheckpoint ck = load_checkpoint(p1);
    CHECK(ck.alpha == 0.625f);
    CHECK(ck.config.channel_schedule == cfg.channel_schedule);
    CHECK(ck.config.block_counts == cfg.block_counts);
    REQUIRE(ck.entries.size() == 2);
    CHECK(ck.entries[0].name == "stem.weight");  // insertion order preserved
    CHECK(ck.entries[0].values == ps.get("stem.weight").data());

    ParamStore<float> ps2 = make_store(999);  // same names/shapes, other values
    restore_params(ps2, ck);
    CHECK(ps2.get("stem.weight").data() == ps.get("stem.weight").data());
    CHECK(ps2.get("stem.bias").data() == ps.get("stem.bias").data());

    save_checkpoint(p2, ps2, ck.config, ck.alpha);
    CHECK(read_all(p1) == read_all(p2));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("bad magic is rejected") {
    const std::string p = tmp_path("ckpt_badmagic.cawm");
    {
        std::ofstream out(p, std::ios::binary);
        out << "NOPE1" << std::string(64, '\0');
    }
    CHECK_THROWS_AS(load_checkpoint(p), CorruptCheckpointError);
    std::remove(p.c_str());
}

TEST_CASE("truncated files are rejected at every cut point") {
    const std::string full = tmp_path("ckpt_full.cawm");
    ParamStore<float> ps = make_store(602);
    save_checkpoint(full, ps, NetConfig::tiny_preset(), 0.5f);
    std::vector<char> bytes = read_all(full);
    const std::string cut = tmp_path("ckpt_cut.cawm");
    for (size_t keep : {size_t{3}, bytes.size() / 2, bytes.size() - 1}) {
        std::ofstream out(cut, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(keep));
        out.close();
        CHECK_THROWS_AS(load_checkpoint(cut), CorruptCheckpointError);
    }
    std::remove(full.c_str());
    std::remove(cut.c_str());
}

TEST_CASE("restore rejects mismatched names and shapes") {
    const std::string p = tmp_path("ckpt_mismatch.cawm");
    ParamStore<float> ps = make_store(603);
    save_checkpoint(p, ps, NetConfig::tiny_preset(), 0.5f);
    LoadedCheckpoint ck = load_checkpoint(p);

    ParamStore<float> renamed;
    renamed.add("stem.weight", Tensor<float>::zeros({1, 4, 3, 3}));
    renamed.add("stem.offset", Tensor<float>::zeros({1, 4, 1, 1}));
    CHECK_THROWS_AS(restore_params(renamed, ck), CorruptCheckpointError);

    ParamStore<float> reshaped;
    reshaped.add("stem.weight", Tensor<float>::zeros({1, 4, 3, 3}));
    reshaped.add("stem.bias", Tensor<float>::zeros({1, 2, 1, 1}));
    CHECK_THROWS_AS(restore_params(reshaped, ck), CorruptCheckpointError);
    std::remove(p.c_str());
}

TEST_CASE("filesystem failures surface as io errors") {
    CHECK_THROWS_AS(load_checkpoint("/nonexistent_dir_xyz/ck.cawm"), IoError);
    ParamStore<float> ps = make_store(604);
    CHECK_THROWS_AS(
        save_checkpoint("/nonexistent_dir_xyz/ck.cawm", ps, NetConfig::tiny_preset(), 0.5f),
        IoError);
}
