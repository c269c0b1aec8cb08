#include "metafas/net/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "metafas/common.hpp"

namespace metafas::net {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'F', 'B', 'L', 'O', 'B', 'S', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_i64(std::ofstream& out, std::int64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
std::int64_t read_i64(std::ifstream& in) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

void save_group(const std::string& path, const ParamGroup& g) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(kMagic, 8);
    write_u32(out, static_cast<std::uint32_t>(g.blobs.size()));
    for (const Blob& b : g.blobs) {
        write_u32(out, static_cast<std::uint32_t>(b.name.size()));
        out.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
        write_u32(out, static_cast<std::uint32_t>(b.shape.size()));
        for (int d : b.shape) write_i64(out, d);
        write_i64(out, static_cast<std::int64_t>(b.v.size()));
        out.write(reinterpret_cast<const char*>(b.v.data()), static_cast<std::streamsize>(b.v.size() * 8));
    }
    if (!out) throw DataError("failed writing " + path);
}

ParamGroup load_group(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw DataError("bad blob file magic in " + path);
    ParamGroup g;
    const std::uint32_t n = read_u32(in);
    g.blobs.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        Blob& b = g.blobs[i];
        const std::uint32_t name_len = read_u32(in);
        b.name.resize(name_len);
        in.read(b.name.data(), name_len);
        const std::uint32_t ndims = read_u32(in);
        b.shape.resize(ndims);
        for (std::uint32_t d = 0; d < ndims; ++d) b.shape[d] = static_cast<int>(read_i64(in));
        const std::int64_t count = read_i64(in);
        b.v.resize(static_cast<size_t>(count));
        in.read(reinterpret_cast<char*>(b.v.data()), count * 8);
        if (!in) throw DataError("truncated blob file " + path);
    }
    return g;
}

json config_to_json(const NetConfig& c) {
    return {{"image_size", c.image_size},   {"base_channels", c.base_channels},
            {"asc_channels", c.asc_channels}, {"hidden", c.hidden},
            {"norm_groups", c.norm_groups},   {"eca_kernel", c.eca_kernel}};
}

NetConfig config_from_json(const json& j) {
    NetConfig c;
    c.image_size = j.at("image_size").get<int>();
    c.base_channels = j.at("base_channels").get<int>();
    c.asc_channels = j.at("asc_channels").get<int>();
    c.hidden = j.at("hidden").get<int>();
    c.norm_groups = j.at("norm_groups").get<int>();
    c.eca_kernel = j.at("eca_kernel").get<int>();
    return c;
}

// GradBuffer serialized as a nameless group.
ParamGroup buffer_as_group(const GradBuffer& gb) {
    ParamGroup g;
    g.blobs.resize(gb.g.size());
    for (size_t i = 0; i < gb.g.size(); ++i) {
        g.blobs[i].name = "b" + std::to_string(i);
        g.blobs[i].shape = {static_cast<int>(gb.g[i].size())};
        g.blobs[i].v = gb.g[i];
    }
    return g;
}

GradBuffer group_as_buffer(const ParamGroup& g) {
    GradBuffer gb;
    gb.g.resize(g.blobs.size());
    for (size_t i = 0; i < g.blobs.size(); ++i) gb.g[i] = g.blobs[i].v;
    return gb;
}

}  // namespace

void save_checkpoint(const std::string& dir, const Checkpoint& ck) {
    fs::create_directories(dir);
    save_group((fs::path(dir) / "theta_f.bin").string(), ck.params.theta_f);
    save_group((fs::path(dir) / "theta_d.bin").string(), ck.params.theta_d);
    save_group((fs::path(dir) / "theta_s.bin").string(), ck.params.theta_s);
    save_group((fs::path(dir) / "theta_m.bin").string(), ck.params.theta_m);

    json meta;
    meta["config"] = config_to_json(ck.config);
    meta["step"] = ck.step;
    meta["rng_state"] = ck.rng_state;
    meta["adam_t"] = ck.adam_t;
    json extras = json::array();
    for (const auto& [name, buf] : ck.extras) {
        save_group((fs::path(dir) / (name + ".bin")).string(), buffer_as_group(buf));
        extras.push_back(name);
    }
    meta["extras"] = extras;

    std::ofstream out(fs::path(dir) / "meta.json");
    if (!out) throw DataError("cannot write checkpoint meta.json in " + dir);
    out << meta.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& dir) {
    const fs::path meta_path = fs::path(dir) / "meta.json";
    if (!fs::exists(meta_path)) throw DataError("no meta.json in checkpoint " + dir);
    json meta;
    try {
        std::ifstream in(meta_path);
        in >> meta;
    } catch (const std::exception& e) {
        throw DataError("malformed checkpoint meta.json: " + std::string(e.what()));
    }

    Checkpoint ck;
    ck.config = config_from_json(meta.at("config"));
    ck.step = meta.at("step").get<std::int64_t>();
    ck.rng_state = meta.at("rng_state").get<std::string>();
    ck.adam_t = meta.value("adam_t", static_cast<std::int64_t>(0));
    ck.params.theta_f = load_group((fs::path(dir) / "theta_f.bin").string());
    ck.params.theta_d = load_group((fs::path(dir) / "theta_d.bin").string());
    ck.params.theta_s = load_group((fs::path(dir) / "theta_s.bin").string());
    ck.params.theta_m = load_group((fs::path(dir) / "theta_m.bin").string());
    for (const auto& name : meta.value("extras", json::array()))
        ck.extras.emplace_back(name.get<std::string>(),
                               group_as_buffer(load_group((fs::path(dir) / (name.get<std::string>() + ".bin")).string())));
    return ck;
}

}  // namespace metafas::net
