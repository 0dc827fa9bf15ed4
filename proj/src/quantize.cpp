#include "rfmtl/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "rfmtl/adam.hpp"
#include "rfmtl/checkpoint.hpp"
#include "rfmtl/errors.hpp"
#include "rfmtl/io_util.hpp"
#include "rfmtl/loss.hpp"

namespace rfmtl {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[] = "RFMTLQ1";
constexpr std::uint16_t kVersion = 1;

double round_half_away(double v) { return v < 0.0 ? std::ceil(v - 0.5) : std::floor(v + 0.5); }

bool is_site_kind(LayerKind k) { return k == LayerKind::Conv2D || k == LayerKind::Dense; }

// "<branch>/<prefix>" recovered from the layer's weight parameter name.
std::string site_base(const Layer& l) {
    const std::string& wname = l.params().front()->name;
    return wname.substr(0, wname.rfind('/'));
}

void check_range(float lo, float hi, const char* who) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw CalibrationError(std::string(who) + ": range must be finite");
    if (!(lo < hi))
        throw CalibrationError(std::string(who) +
                               ": degenerate range (lo >= hi); widen_range the inputs first");
}

// Requires act_ranges to provide both sites of every conv/dense layer.
template <typename ExcT>
void require_coverage(const ModelGraph& g, const RangeMap& ranges, const char* who) {
    for (const std::string& base : activation_sites(g)) {
        for (const char* suffix : {"/in", "/out"}) {
            if (ranges.find(base + suffix) == ranges.end())
                throw ExcT(std::string(who) + ": no calibrated range for site " + base + suffix);
        }
    }
}

// Parameter tensors plus batch-norm running moments in traversal order,
// mirroring the float checkpoint's record order.
struct TensorRecord {
    std::string name;
    std::string branch;
    Tensor* tensor;
    bool quantizable;
};

std::vector<TensorRecord> collect_records(ModelGraph& g) {
    std::vector<TensorRecord> out;
    auto walk = [&out](std::vector<Layer>& layers) {
        for (Layer& l : layers) {
            const auto ps = l.params();
            for (Param* p : ps) out.push_back({p->name, p->branch, &p->value, p->quantizable});
            if (l.spec().kind == LayerKind::BatchNorm) {
                const std::string base = ps.front()->name.substr(0, ps.front()->name.rfind('/'));
                out.push_back({base + "/running_mean", ps.front()->branch, &l.running_mean(), false});
                out.push_back({base + "/running_var", ps.front()->branch, &l.running_var(), false});
            }
        }
    };
    walk(g.trunk);
    walk(g.mod_branch);
    walk(g.sig_branch);
    return out;
}

}  // namespace

std::pair<float, float> widen_range(float lo, float hi) {
    if (lo < hi) return {lo, hi};
    const float pad = std::max(1e-6f, std::fabs(lo) * 1e-6f);
    return {lo - pad, hi + pad};
}

QuantizedTensor quantize_tensor(const Tensor& x, float lo, float hi) {
    check_range(lo, hi, "quantize_tensor");
    QuantizedTensor qt;
    qt.shape = x.shape();
    qt.scale = ((double)hi - (double)lo) / 255.0;
    qt.zero_point = (std::int32_t)std::clamp(round_half_away(-128.0 - (double)lo / qt.scale),
                                             -128.0, 127.0);
    qt.q.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = round_half_away((double)x[i] / qt.scale) + (double)qt.zero_point;
        qt.q[i] = (std::int8_t)std::clamp(c, -128.0, 127.0);
    }
    return qt;
}

Tensor dequantize(const QuantizedTensor& qt) {
    Tensor out(qt.shape);
    if (out.size() != qt.q.size())
        throw DimensionError("dequantize: payload length does not match shape");
    for (std::size_t i = 0; i < qt.q.size(); ++i)
        out[i] = (float)(qt.scale * (double)((std::int32_t)qt.q[i] - qt.zero_point));
    return out;
}

Tensor fake_quant(const Tensor& x, float lo, float hi, double levels, Tensor* pass_mask) {
    check_range(lo, hi, "fake_quant");
    if (levels < 1.0) throw ConfigError("fake_quant: need at least one level");
    const double step = ((double)hi - (double)lo) / levels;
    Tensor out(x.shape());
    if (pass_mask) *pass_mask = Tensor(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = (double)x[i];
        const bool inside = v >= (double)lo && v <= (double)hi;
        const double clipped = std::clamp(v, (double)lo, (double)hi);
        out[i] = (float)((double)lo + round_half_away((clipped - (double)lo) / step) * step);
        if (pass_mask) (*pass_mask)[i] = inside ? 1.0f : 0.0f;
    }
    return out;
}

const char* calib_mode_name(CalibMode m) {
    return m == CalibMode::Percentile ? "percentile" : "minmax";
}

CalibMode calib_mode_from_name(const std::string& name) {
    if (name == "percentile") return CalibMode::Percentile;
    if (name == "minmax") return CalibMode::MinMax;
    throw ConfigError("unknown calibration mode: " + name);
}

std::vector<std::string> activation_sites(const ModelGraph& g) {
    std::vector<std::string> out;
    auto walk = [&out](const std::vector<Layer>& layers) {
        for (const Layer& l : layers)
            if (is_site_kind(l.spec().kind)) out.push_back(site_base(l));
    };
    walk(g.trunk);
    walk(g.mod_branch);
    walk(g.sig_branch);
    return out;
}

float percentile_nearest_rank(std::vector<float> values, double p) {
    if (values.empty()) throw CalibrationError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t idx =
        (std::size_t)std::floor(p * (double)(values.size() - 1) + 0.5);
    return values[idx];
}

RangeMap calibrate_activations(const ModelGraph& g, const TensorDataset& calib, CalibMode mode) {
    if (calib.size() == 0) throw CalibrationError("calibration set is empty");
    std::map<std::string, std::vector<float>> obs;

    const std::size_t chunk = 256;
    const std::size_t row = Tensor::count(g.input_shape());
    for (std::size_t start = 0; start < calib.size(); start += chunk) {
        const std::size_t count = std::min(chunk, calib.size() - start);
        Tensor h(batched(count, g.input_shape()));
        std::copy(calib.x.data() + start * row, calib.x.data() + (start + count) * row, h.data());

        auto run = [&obs](const std::vector<Layer>& layers, Tensor t) {
            for (const Layer& l : layers) {
                const bool site = is_site_kind(l.spec().kind);
                std::string base;
                if (site) {
                    base = site_base(l);
                    auto& v = obs[base + "/in"];
                    v.insert(v.end(), t.values().begin(), t.values().end());
                }
                t = l.forward_infer(t);
                if (site) {
                    auto& v = obs[base + "/out"];
                    v.insert(v.end(), t.values().begin(), t.values().end());
                }
            }
            return t;
        };
        const Tensor trunk_out = run(g.trunk, std::move(h));
        run(g.mod_branch, trunk_out);
        run(g.sig_branch, trunk_out);
    }

    RangeMap ranges;
    for (auto& [site, values] : obs) {
        float lo, hi;
        if (mode == CalibMode::MinMax) {
            const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
            lo = *mn;
            hi = *mx;
        } else {
            std::sort(values.begin(), values.end());
            const auto cut = [&](double p) {
                return values[(std::size_t)std::floor(p * (double)(values.size() - 1) + 0.5)];
            };
            lo = cut(0.001);
            hi = cut(0.999);
        }
        std::tie(lo, hi) = widen_range(lo, hi);
        ranges[site] = {lo, hi};
    }
    return ranges;
}

QuantizedModel quantize_model(const ModelGraph& g, const RangeMap& act_ranges, CalibMode mode) {
    require_coverage<CalibrationError>(g, act_ranges, "quantize_model");
    QuantizedModel qm;
    qm.graph = g;
    qm.act_ranges = act_ranges;
    qm.calib_mode = mode;
    for (Param* p : qm.graph.params()) {
        if (!p->quantizable) continue;
        const auto [mn, mx] =
            std::minmax_element(p->value.values().begin(), p->value.values().end());
        const auto [lo, hi] = widen_range(*mn, *mx);
        QuantizedTensor qt = quantize_tensor(p->value, lo, hi);
        p->value = dequantize(qt);
        qm.weights.push_back(std::move(qt));
        qm.weight_names.push_back(p->name);
    }
    return qm;
}

ForwardResult quantized_inference(const QuantizedModel& qm, const Tensor& x) {
    require_coverage<StateError>(qm.graph, qm.act_ranges, "quantized_inference");
    return qm.graph.forward_infer(x);
}

std::pair<std::vector<float>, std::vector<float>> quantized_inference(const QuantizedModel& qm,
                                                                      const ComplexFrame& frame) {
    const ForwardResult r = quantized_inference(qm, frame_to_tensor(frame));
    return {r.mod_probs.values(), r.sig_probs.values()};
}

namespace {

// One train-mode pass with simulated quantization. Weights are snapped in
// place (masters saved) on the forward and restored right after each
// layer's backward, so Adam always updates the float masters.
class FakeQuantPass {
public:
    FakeQuantPass(ModelGraph& g, const RangeMap& ranges) : g_(g), ranges_(ranges) {
        trunk_.resize(g.trunk.size());
        mod_.resize(g.mod_branch.size());
        sig_.resize(g.sig_branch.size());
    }

    ForwardResult forward(const Tensor& x, Rng& rng) {
        trunk_out_ = seq_forward(g_.trunk, trunk_, x, rng);
        ForwardResult r;
        r.mod_probs = seq_forward(g_.mod_branch, mod_, trunk_out_, rng);
        r.sig_probs = seq_forward(g_.sig_branch, sig_, trunk_out_, rng);
        return r;
    }

    void backward(const Tensor& dmod, const Tensor& dsig) {
        Tensor dt_m = seq_backward(g_.mod_branch, mod_, dmod);
        const Tensor dt_s = seq_backward(g_.sig_branch, sig_, dsig);
        if (!dt_m.same_shape(dt_s))
            throw DimensionError("branch gradients disagree on the trunk output shape");
        for (std::size_t i = 0; i < dt_m.size(); ++i) dt_m[i] += dt_s[i];
        seq_backward(g_.trunk, trunk_, dt_m);
    }

private:
    struct Slot {
        LayerCache cache;
        Tensor in_mask, out_mask;
        Tensor saved_w;
    };

    const ActRange& range_at(const std::string& site) const {
        const auto it = ranges_.find(site);
        if (it == ranges_.end())
            throw CalibrationError("qat_finetune: no calibrated range for site " + site);
        return it->second;
    }

    Tensor seq_forward(std::vector<Layer>& layers, std::vector<Slot>& slots, Tensor h, Rng& rng) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            Layer& l = layers[i];
            Slot& s = slots[i];
            const bool site = is_site_kind(l.spec().kind);
            std::string base;
            if (site) {
                base = site_base(l);
                const ActRange& rin = range_at(base + "/in");
                h = fake_quant(h, rin.lo, rin.hi, 255.0, &s.in_mask);
                Param* w = l.params().front();
                s.saved_w = w->value;
                const auto [mn, mx] =
                    std::minmax_element(w->value.values().begin(), w->value.values().end());
                const auto [lo, hi] = widen_range(*mn, *mx);
                w->value = fake_quant(w->value, lo, hi, 255.0);
            }
            h = l.forward_train(h, rng, s.cache);
            if (site) {
                const ActRange& rout = range_at(base + "/out");
                h = fake_quant(h, rout.lo, rout.hi, 255.0, &s.out_mask);
            }
        }
        return h;
    }

    Tensor seq_backward(std::vector<Layer>& layers, std::vector<Slot>& slots, Tensor dy) {
        for (std::size_t r = layers.size(); r-- > 0;) {
            Layer& l = layers[r];
            Slot& s = slots[r];
            const bool site = is_site_kind(l.spec().kind);
            if (site)
                for (std::size_t i = 0; i < dy.size(); ++i) dy[i] *= s.out_mask[i];
            dy = l.backward(dy, s.cache);
            if (site) {
                l.params().front()->value = s.saved_w;  // restore the float master
                for (std::size_t i = 0; i < dy.size(); ++i) dy[i] *= s.in_mask[i];
            }
        }
        return dy;
    }

    ModelGraph& g_;
    const RangeMap& ranges_;
    std::vector<Slot> trunk_, mod_, sig_;
    Tensor trunk_out_;
};

// Validation view: the float masters snapped exactly as deployment would.
ModelGraph snapped_copy(const ModelGraph& g) {
    ModelGraph out = g;
    for (Param* p : out.params()) {
        if (!p->quantizable) continue;
        const auto [mn, mx] =
            std::minmax_element(p->value.values().begin(), p->value.values().end());
        const auto [lo, hi] = widen_range(*mn, *mx);
        p->value = fake_quant(p->value, lo, hi, 255.0);
    }
    return out;
}

}  // namespace

TrainResult qat_finetune(const ModelGraph& g, const TensorDataset& train_set,
                         const TensorDataset& val_set, const TrainConfig& tc,
                         const LossWeights& w, const RangeMap& act_ranges) {
    tc.validate();
    w.validate();
    require_coverage<CalibrationError>(g, act_ranges, "qat_finetune");
    if (train_set.size() == 0 || val_set.size() == 0)
        throw ConfigError("fine-tuning requires non-empty train and validation splits");

    ModelGraph model = g;
    Rng rng(derive_seed(tc.seed, 0x7174));
    TrainResult res;
    res.model = model;  // float masters; callers re-quantize the result
    const AdamConfig adam{tc.lr, 0.9f, 0.999f, 1e-8f};
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), (std::size_t)0);
    int wait = 0;
    const std::size_t row = Tensor::count(model.input_shape());

    for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng.uniform_below(i);
            std::swap(order[i - 1], order[j]);
        }

        double loss_sum = 0.0;
        std::size_t seen = 0;
        bool bad = false;
        for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
            const std::size_t count = std::min(tc.batch_size, order.size() - start);
            if (count < 2) break;
            Tensor bx(batched(count, model.input_shape()));
            std::vector<int> bmod(count), bsig(count);
            for (std::size_t i = 0; i < count; ++i) {
                std::copy(train_set.x.data() + order[start + i] * row,
                          train_set.x.data() + (order[start + i] + 1) * row,
                          bx.data() + i * row);
                bmod[i] = train_set.mod[order[start + i]];
                bsig[i] = train_set.sig[order[start + i]];
            }
            FakeQuantPass pass(model, act_ranges);
            const ForwardResult fr = pass.forward(bx, rng);
            const JointLoss jl =
                joint_loss(fr.mod_probs, fr.sig_probs, bmod, bsig, w, &res.clamp_warnings);
            if (!std::isfinite(jl.mtl)) {
                bad = true;
                break;
            }
            loss_sum += jl.mtl * (double)count;
            seen += count;
            auto [dmod, dsig] = joint_loss_grad(fr.mod_probs, fr.sig_probs, bmod, bsig, w);
            pass.backward(dmod, dsig);
            adam_step_all(model.params(), adam);
        }
        if (bad) {
            res.diverged = true;
            break;
        }

        EpochStats st;
        st.epoch = epoch;
        st.train_loss = seen ? loss_sum / (double)seen : 0.0;
        const ModelGraph deployed = snapped_copy(model);
        const SplitEval ev = evaluate_split(deployed, val_set, w, &res.clamp_warnings);
        st.val_loss = ev.loss.mtl;
        st.mod_acc = ev.mod_acc;
        st.sig_acc = ev.sig_acc;
        res.history.push_back(st);

        if (!std::isfinite(st.val_loss)) {
            res.diverged = true;
            break;
        }
        if (st.val_loss < res.best_val_loss) {
            res.best_val_loss = st.val_loss;
            res.best_epoch = epoch;
            res.model = model;  // float masters; caller re-quantizes
            wait = 0;
        } else if (++wait >= tc.patience) {
            break;
        }
    }
    return res;
}

void save_quantized(const QuantizedModel& qm, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    io::write_bytes(os, kMagic, sizeof(kMagic) - 1);
    io::write_le<std::uint16_t>(os, kVersion);

    ordered_json header;
    header["structure"] = ordered_json::parse(graph_structure_json(qm.graph));
    header["calibration"] = calib_mode_name(qm.calib_mode);
    ordered_json ranges;
    for (const auto& [site, r] : qm.act_ranges) ranges[site] = {r.lo, r.hi};
    header["act_ranges"] = ranges;
    io::write_string(os, header.dump());

    std::map<std::string, const QuantizedTensor*> by_name;
    for (std::size_t i = 0; i < qm.weights.size(); ++i)
        by_name[qm.weight_names[i]] = &qm.weights[i];

    ModelGraph& graph = const_cast<ModelGraph&>(qm.graph);  // records point at tensors, read-only
    const auto records = collect_records(graph);
    io::write_le<std::uint32_t>(os, (std::uint32_t)records.size());
    for (const TensorRecord& rec : records) {
        io::write_string(os, rec.name);
        io::write_string(os, rec.branch);
        if (rec.quantizable) {
            const auto it = by_name.find(rec.name);
            if (it == by_name.end())
                throw FormatError("quantized model: no codes for weight \"" + rec.name + "\"");
            const QuantizedTensor& qt = *it->second;
            io::write_le<std::uint8_t>(os, 1);
            io::write_f64_le(os, qt.scale);
            io::write_le<std::int32_t>(os, qt.zero_point);
            io::write_le<std::uint32_t>(os, (std::uint32_t)qt.shape.size());
            for (std::size_t d : qt.shape) io::write_le<std::uint32_t>(os, (std::uint32_t)d);
            for (std::int8_t c : qt.q) io::write_le<std::int8_t>(os, c);
        } else {
            io::write_le<std::uint8_t>(os, 0);
            io::write_le<std::uint32_t>(os, (std::uint32_t)rec.tensor->shape().size());
            for (std::size_t d : rec.tensor->shape())
                io::write_le<std::uint32_t>(os, (std::uint32_t)d);
            for (float v : rec.tensor->values()) io::write_f32_le(os, v);
        }
    }
    if (!os) throw FormatError("write failed: " + path);
}

QuantizedModel load_quantized(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    io::expect_magic(is, kMagic);
    const auto version = io::read_le<std::uint16_t>(is);
    if (version != kVersion)
        throw FormatError("quantized checkpoint: unsupported version " + std::to_string(version));

    const ordered_json header = ordered_json::parse(io::read_string(is));
    QuantizedModel qm;
    qm.graph = graph_from_structure_json(header.at("structure").dump());
    qm.calib_mode = calib_mode_from_name(header.at("calibration").get<std::string>());
    for (const auto& [site, r] : header.at("act_ranges").items())
        qm.act_ranges[site] = {r.at(0).get<float>(), r.at(1).get<float>()};

    const auto expected = collect_records(qm.graph);
    std::map<std::string, const TensorRecord*> by_name;
    for (const TensorRecord& rec : expected) by_name[rec.name] = &rec;

    const auto n_records = io::read_le<std::uint32_t>(is);
    if (n_records != expected.size())
        throw FormatError("quantized checkpoint: tensor count does not match the structure");
    for (std::uint32_t r = 0; r < n_records; ++r) {
        const std::string name = io::read_string(is);
        const std::string branch = io::read_string(is);
        (void)branch;
        const auto it = by_name.find(name);
        if (it == by_name.end())
            throw FormatError("quantized checkpoint: unexpected tensor \"" + name + "\"");
        const TensorRecord& rec = *it->second;
        const auto dtype = io::read_le<std::uint8_t>(is);
        if (dtype == 1) {
            if (!rec.quantizable)
                throw FormatError("quantized checkpoint: int8 codes for a 32-bit tensor");
            QuantizedTensor qt;
            qt.scale = io::read_f64_le(is);
            qt.zero_point = io::read_le<std::int32_t>(is);
            const auto rank = io::read_le<std::uint32_t>(is);
            qt.shape.resize(rank);
            for (auto& d : qt.shape) d = io::read_le<std::uint32_t>(is);
            if (qt.shape != rec.tensor->shape())
                throw FormatError("quantized checkpoint: shape mismatch for \"" + name + "\"");
            qt.q.resize(Tensor::count(qt.shape));
            for (auto& c : qt.q) c = io::read_le<std::int8_t>(is);
            *rec.tensor = dequantize(qt);
            qm.weights.push_back(std::move(qt));
            qm.weight_names.push_back(name);
        } else if (dtype == 0) {
            if (rec.quantizable)
                throw FormatError("quantized checkpoint: weight \"" + name + "\" is not quantized");
            const auto rank = io::read_le<std::uint32_t>(is);
            std::vector<std::size_t> shape(rank);
            for (auto& d : shape) d = io::read_le<std::uint32_t>(is);
            if (shape != rec.tensor->shape())
                throw FormatError("quantized checkpoint: shape mismatch for \"" + name + "\"");
            for (float& v : rec.tensor->values()) v = io::read_f32_le(is);
        } else {
            throw FormatError("quantized checkpoint: unknown dtype tag");
        }
        by_name.erase(it);
    }
    if (!by_name.empty())
        throw FormatError("quantized checkpoint: missing tensor records");
    return qm;
}

std::string SizeReport::to_json() const {
    ordered_json j;
    j["float_weight_payload_bytes"] = float_weight_payload_bytes;
    j["int8_weight_payload_bytes"] = int8_weight_payload_bytes;
    j["weight_payload_ratio"] = weight_payload_ratio;
    j["float_total_payload_bytes"] = float_total_payload_bytes;
    j["int8_total_payload_bytes"] = int8_total_payload_bytes;
    j["total_payload_ratio"] = total_payload_ratio;
    if (float_file_bytes && int8_file_bytes) {
        j["float_file_bytes"] = float_file_bytes;
        j["int8_file_bytes"] = int8_file_bytes;
        j["file_ratio"] = file_ratio;
    }
    j["context"] =
        "Total-file ratios reported for framework-serialized models of this size (for example "
        "11.8x, from 2.97 MB down to 251.6 kB) include container overhead beyond the tensors "
        "themselves; the payload ratios here count tensor bytes only, and the file ratio counts "
        "this toolkit's own containers.";
    return j.dump(2);
}

SizeReport size_report(const ModelGraph& g, const QuantizedModel& qm,
                       const std::string& float_path, const std::string& quant_path) {
    SizeReport rep;
    ModelGraph& gm = const_cast<ModelGraph&>(g);
    for (const TensorRecord& rec : collect_records(gm)) {
        const std::size_t bytes = rec.tensor->size() * sizeof(float);
        rep.float_total_payload_bytes += bytes;
        if (rec.quantizable) rep.float_weight_payload_bytes += bytes;
    }
    ModelGraph& qg = const_cast<ModelGraph&>(qm.graph);
    for (const TensorRecord& rec : collect_records(qg)) {
        if (rec.quantizable) continue;
        rep.int8_total_payload_bytes += rec.tensor->size() * sizeof(float);
    }
    for (const QuantizedTensor& qt : qm.weights) {
        const std::size_t bytes = qt.size() + sizeof(double) + sizeof(std::int32_t);
        rep.int8_weight_payload_bytes += bytes;
        rep.int8_total_payload_bytes += bytes;
    }
    rep.weight_payload_ratio =
        (double)rep.float_weight_payload_bytes / (double)rep.int8_weight_payload_bytes;
    rep.total_payload_ratio =
        (double)rep.float_total_payload_bytes / (double)rep.int8_total_payload_bytes;
    namespace fs = std::filesystem;
    if (!float_path.empty() && fs::exists(float_path))
        rep.float_file_bytes = (std::size_t)fs::file_size(float_path);
    if (!quant_path.empty() && fs::exists(quant_path))
        rep.int8_file_bytes = (std::size_t)fs::file_size(quant_path);
    if (rep.float_file_bytes && rep.int8_file_bytes)
        rep.file_ratio = (double)rep.float_file_bytes / (double)rep.int8_file_bytes;
    return rep;
}

}  // namespace rfmtl
