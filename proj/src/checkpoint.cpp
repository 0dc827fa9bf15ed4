#include "rfmtl/checkpoint.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "rfmtl/errors.hpp"
#include "rfmtl/io_util.hpp"

namespace rfmtl {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[] = "RFMTLW1";
constexpr std::uint16_t kVersion = 1;

ordered_json layer_json(const Layer& l) {
    const LayerSpec& s = l.spec();
    ordered_json j;
    j["kind"] = layer_kind_name(s.kind);
    switch (s.kind) {
        case LayerKind::Conv2D:
            j["kernel_h"] = s.kernel_h;
            j["kernel_w"] = s.kernel_w;
            j["num_kernels"] = s.num_kernels;
            j["stride"] = s.stride;
            j["padding"] = s.padding;
            break;
        case LayerKind::MaxPool2D:
            j["pool"] = s.pool;
            j["pool_stride"] = s.pool_stride;
            break;
        case LayerKind::Dense:
            j["units"] = s.units;
            break;
        case LayerKind::Dropout:
            j["rate"] = s.rate;
            break;
        case LayerKind::GaussianNoise:
            j["stddev"] = s.stddev;
            break;
        default:
            break;
    }
    return j;
}

LayerSpec layer_from_json(const ordered_json& j) {
    const LayerKind kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (kind) {
        case LayerKind::Conv2D:
            return LayerSpec::conv2d(j.at("kernel_h"), j.at("kernel_w"), j.at("num_kernels"),
                                     j.at("stride"), j.at("padding"));
        case LayerKind::MaxPool2D:
            return LayerSpec::maxpool(j.at("pool"), j.at("pool_stride"));
        case LayerKind::BatchNorm:
            return LayerSpec::batchnorm();
        case LayerKind::ReLU:
            return LayerSpec::relu();
        case LayerKind::Dense:
            return LayerSpec::dense(j.at("units"));
        case LayerKind::Dropout:
            return LayerSpec::dropout(j.at("rate"));
        case LayerKind::GaussianNoise:
            return LayerSpec::gaussian_noise(j.at("stddev"));
        case LayerKind::Flatten:
            return LayerSpec::flatten();
        case LayerKind::Softmax:
            return LayerSpec::softmax();
    }
    throw FormatError("checkpoint: unknown layer kind");
}

struct NamedTensor {
    std::string name;
    std::string branch;
    const Tensor* tensor;
};

// Parameters plus batch-norm running moments, in graph traversal order.
// Running moments are named "<branch>/<prefix>/running_mean|running_var",
// with the prefix recovered from the layer's gamma parameter.
std::vector<NamedTensor> collect_tensors(const ModelGraph& g) {
    std::vector<NamedTensor> out;
    auto walk = [&out](const std::vector<Layer>& layers) {
        for (const Layer& l : layers) {
            const auto ps = l.params();
            for (const Param* p : ps) out.push_back({p->name, p->branch, &p->value});
            if (l.spec().kind == LayerKind::BatchNorm) {
                // gamma is the first param slot of a batch-norm layer.
                const std::string base = ps.front()->name.substr(0, ps.front()->name.rfind('/'));
                out.push_back({base + "/running_mean", ps.front()->branch, &l.running_mean()});
                out.push_back({base + "/running_var", ps.front()->branch, &l.running_var()});
            }
        }
    };
    walk(g.trunk);
    walk(g.mod_branch);
    walk(g.sig_branch);
    return out;
}

void rebuild_section(std::vector<Layer>& layers, const ordered_json& section,
                     std::vector<std::size_t>& shape, const std::string& branch) {
    Rng init_rng(0);  // placeholder values; every tensor is overwritten below
    for (const auto& lj : section) {
        const LayerSpec spec = layer_from_json(lj);
        const std::string prefix = layer_kind_name(spec.kind) + std::to_string(layers.size());
        layers.emplace_back(spec, shape, prefix, branch, init_rng);
        shape = layers.back().out_shape();
    }
}

void write_tensor_payload(std::ostream& os, const std::string& name, const std::string& branch,
                          const Tensor& t) {
    io::write_string(os, name);
    io::write_string(os, branch);
    io::write_le<std::uint32_t>(os, (std::uint32_t)t.shape().size());
    for (std::size_t d : t.shape()) io::write_le<std::uint32_t>(os, (std::uint32_t)d);
    for (float v : t.values()) io::write_f32_le(os, v);
}

}  // namespace

std::string graph_structure_json(const ModelGraph& g) {
    ordered_json j;
    j["input_shape"] = g.input_shape();
    for (const auto& [key, section] : {std::pair{"trunk", &g.trunk},
                                       std::pair{"mod_branch", &g.mod_branch},
                                       std::pair{"sig_branch", &g.sig_branch}}) {
        ordered_json arr = ordered_json::array();
        for (const Layer& l : *section) arr.push_back(layer_json(l));
        j[key] = arr;
    }
    return j.dump();
}

ModelGraph graph_from_structure_json(const std::string& json_text) {
    const ordered_json j = ordered_json::parse(json_text);
    ModelGraph g;
    std::vector<std::size_t> shape = j.at("input_shape").get<std::vector<std::size_t>>();
    rebuild_section(g.trunk, j.at("trunk"), shape, "sh");
    std::vector<std::size_t> mod_shape = shape;
    rebuild_section(g.mod_branch, j.at("mod_branch"), mod_shape, "m");
    rebuild_section(g.sig_branch, j.at("sig_branch"), shape, "s");
    return g;
}

void save_checkpoint(const ModelGraph& g, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    io::write_bytes(os, kMagic, sizeof(kMagic) - 1);
    io::write_le<std::uint16_t>(os, kVersion);
    io::write_string(os, graph_structure_json(g));
    const auto tensors = collect_tensors(g);
    io::write_le<std::uint32_t>(os, (std::uint32_t)tensors.size());
    for (const NamedTensor& nt : tensors) write_tensor_payload(os, nt.name, nt.branch, *nt.tensor);
    if (!os) throw FormatError("write failed: " + path);
}

ModelGraph load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    io::expect_magic(is, kMagic);
    const auto version = io::read_le<std::uint16_t>(is);
    if (version != kVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    ModelGraph g = graph_from_structure_json(io::read_string(is));

    // Destination map: every tensor the format expects, by name.
    std::map<std::string, Tensor*> dst;
    auto walk = [&dst](std::vector<Layer>& layers) {
        for (Layer& l : layers) {
            const auto ps = l.params();
            for (Param* p : ps) dst[p->name] = &p->value;
            if (l.spec().kind == LayerKind::BatchNorm) {
                const std::string base = ps.front()->name.substr(0, ps.front()->name.rfind('/'));
                dst[base + "/running_mean"] = &l.running_mean();
                dst[base + "/running_var"] = &l.running_var();
            }
        }
    };
    walk(g.trunk);
    walk(g.mod_branch);
    walk(g.sig_branch);

    const auto n_records = io::read_le<std::uint32_t>(is);
    if (n_records != dst.size())
        throw FormatError("checkpoint: tensor count does not match the graph structure");
    for (std::uint32_t r = 0; r < n_records; ++r) {
        const std::string name = io::read_string(is);
        const std::string branch = io::read_string(is);
        (void)branch;
        const auto it = dst.find(name);
        if (it == dst.end()) throw FormatError("checkpoint: unexpected tensor \"" + name + "\"");
        const auto rank = io::read_le<std::uint32_t>(is);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = io::read_le<std::uint32_t>(is);
        if (shape != it->second->shape())
            throw FormatError("checkpoint: shape mismatch for \"" + name + "\"");
        for (float& v : it->second->values()) v = io::read_f32_le(is);
        dst.erase(it);
    }
    return g;
}

}  // namespace rfmtl
