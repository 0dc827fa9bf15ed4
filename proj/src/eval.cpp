#include "rfmtl/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "rfmtl/errors.hpp"
#include "rfmtl/kernels.hpp"
#include "rfmtl/waveform.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rfmtl {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kChunk = 256;

std::size_t argmax_row(const Tensor& probs, std::size_t row) {
    const std::size_t k = probs.dim(1);
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
        if (probs.at2(row, j) > probs.at2(row, best)) best = j;
    return best;
}

// Inference over the whole dataset in fixed-size chunks.
std::pair<Tensor, Tensor> predict_all(const ModelGraph& model, const TensorDataset& ds) {
    const std::size_t n = ds.size();
    const std::size_t row = Tensor::count(model.input_shape());
    Tensor mod({n, model.mod_branch.back().out_shape()[0]});
    Tensor sig({n, model.sig_branch.back().out_shape()[0]});
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t count = std::min(kChunk, n - start);
        Tensor chunk(batched(count, model.input_shape()));
        std::copy(ds.x.data() + start * row, ds.x.data() + (start + count) * row, chunk.data());
        const ForwardResult r = model.forward_infer(chunk);
        std::copy(r.mod_probs.values().begin(), r.mod_probs.values().end(),
                  mod.data() + start * mod.dim(1));
        std::copy(r.sig_probs.values().begin(), r.sig_probs.values().end(),
                  sig.data() + start * sig.dim(1));
    }
    return {std::move(mod), std::move(sig)};
}

std::string environment_fingerprint() {
    std::string env = "g++ " __VERSION__;
#ifdef _OPENMP
    env += ", 1 thread (pinned for timing) of " + std::to_string(omp_get_max_threads());
#else
    env += ", no OpenMP";
#endif
    return env;
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < k(); ++j) s += at(truth, j);
    return s;
}

double ConfusionMatrix::top1_accuracy() const {
    const std::size_t t = total();
    if (t == 0) return 0.0;
    std::size_t diag = 0;
    for (std::size_t i = 0; i < k(); ++i) diag += at(i, i);
    return (double)diag / (double)t;
}

std::vector<double> ConfusionMatrix::normalized() const {
    std::vector<double> out(counts.size(), 0.0);
    for (std::size_t i = 0; i < k(); ++i) {
        const std::size_t rs = row_sum(i);
        if (rs == 0) continue;
        for (std::size_t j = 0; j < k(); ++j) out[i * k() + j] = (double)at(i, j) / (double)rs;
    }
    return out;
}

void ConfusionMatrix::write_csv(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "truth\\pred";
    for (const std::string& name : class_names) os << "," << name;
    os << "\n";
    for (std::size_t i = 0; i < k(); ++i) {
        os << class_names[i];
        for (std::size_t j = 0; j < k(); ++j) os << "," << at(i, j);
        os << "\n";
    }
}

std::vector<SnrAccuracy> accuracy_by_snr(const ModelGraph& model, const TensorDataset& ds) {
    if (ds.size() == 0) throw ConfigError("accuracy_by_snr: empty dataset");
    if (ds.snr_db.size() != ds.size())
        throw ConfigError("accuracy_by_snr: dataset rows are not tagged with SNR");
    const auto [mod_probs, sig_probs] = predict_all(model, ds);

    // Group rows by SNR in centi-dB so cells match the container exactly.
    std::map<long, SnrAccuracy> cells;
    std::map<long, std::pair<std::size_t, std::size_t>> hits;  // (mod, sig) correct counts
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const long key = std::lround(ds.snr_db[i] * 100.0);
        SnrAccuracy& cell = cells[key];
        cell.snr_db = (double)key / 100.0;
        cell.count += 1;
        auto& [mh, sh] = hits[key];
        if (argmax_row(mod_probs, i) == (std::size_t)ds.mod[i]) mh += 1;
        if (argmax_row(sig_probs, i) == (std::size_t)ds.sig[i]) sh += 1;
    }
    std::vector<SnrAccuracy> out;
    out.reserve(cells.size());
    for (auto& [key, cell] : cells) {
        cell.mod_acc = (double)hits[key].first / (double)cell.count;
        cell.sig_acc = (double)hits[key].second / (double)cell.count;
        out.push_back(cell);
    }
    return out;
}

void write_snr_accuracy_csv(const std::string& path, const std::vector<SnrAccuracy>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "snr_db,mod_acc,sig_acc,count\n";
    char buf[128];
    for (const SnrAccuracy& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%zu\n", r.snr_db, r.mod_acc, r.sig_acc,
                      r.count);
        os << buf;
    }
}

ConfusionMatrix confusion(const ModelGraph& model, const TensorDataset& ds, Task task,
                          double snr_db) {
    if (ds.snr_db.size() != ds.size())
        throw ConfigError("confusion: dataset rows are not tagged with SNR");
    std::vector<std::size_t> idx;
    const long key = std::lround(snr_db * 100.0);
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (std::lround(ds.snr_db[i] * 100.0) == key) idx.push_back(i);
    if (idx.empty())
        throw ConfigError("confusion: no examples at " + std::to_string(snr_db) + " dB");
    const TensorDataset cell = select_rows(ds, idx);
    const auto [mod_probs, sig_probs] = predict_all(model, cell);

    ConfusionMatrix cm;
    if (task == Task::Modulation)
        for (std::size_t c = 0; c < kNumModulations; ++c)
            cm.class_names.push_back(modulation_name((Modulation)c));
    else
        for (std::size_t c = 0; c < kNumSignalClasses; ++c)
            cm.class_names.push_back(signal_class_name((SignalClass)c));
    cm.counts.assign(cm.k() * cm.k(), 0);
    const Tensor& probs = task == Task::Modulation ? mod_probs : sig_probs;
    const std::vector<int>& truth = task == Task::Modulation ? cell.mod : cell.sig;
    for (std::size_t i = 0; i < cell.size(); ++i)
        cm.at((std::size_t)truth[i], argmax_row(probs, i)) += 1;
    return cm;
}

LatencyStats benchmark_latency(const ModelGraph& model, std::size_t n_frames,
                               std::size_t repetitions) {
    if (n_frames == 0 || repetitions == 0)
        throw ConfigError("benchmark_latency: need at least one frame and one repetition");
    using clock = std::chrono::steady_clock;

#ifdef _OPENMP
    const int prev_threads = omp_get_max_threads();
    omp_set_num_threads(1);
#endif

    // Deterministic pseudo-frames; content does not affect timing.
    Rng rng(0x6c617431);
    Tensor frame(batched(1, model.input_shape()));
    frame.fill_uniform(rng, -0.1f, 0.1f);

    for (int i = 0; i < 100; ++i) (void)model.forward_infer(frame);  // warm-up

    std::vector<double> ms;
    ms.reserve(n_frames * repetitions);
    for (std::size_t r = 0; r < repetitions; ++r) {
        for (std::size_t f = 0; f < n_frames; ++f) {
            const auto t0 = clock::now();
            (void)model.forward_infer(frame);
            const auto t1 = clock::now();
            ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    }

#ifdef _OPENMP
    omp_set_num_threads(prev_threads);
#endif

    std::sort(ms.begin(), ms.end());
    LatencyStats st;
    st.frames = n_frames;
    st.repetitions = repetitions;
    st.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / (double)ms.size();
    st.median_ms = ms[ms.size() / 2];
    st.p95_ms = ms[std::min(ms.size() - 1, (std::size_t)((double)ms.size() * 0.95))];
    st.environment = environment_fingerprint();
    return st;
}

std::vector<ModelReport> compare_models(const std::vector<NamedModel>& models,
                                        std::size_t baseline, const TensorDataset* ds,
                                        std::size_t latency_frames, std::size_t latency_reps) {
    if (models.empty()) throw ConfigError("compare_models: no models given");
    if (baseline >= models.size()) throw ConfigError("compare_models: baseline index out of range");
    std::vector<ModelReport> reports;
    reports.reserve(models.size());
    for (const NamedModel& nm : models) {
        ModelReport rep;
        rep.name = nm.name;
        rep.cost = graph_cost(*nm.graph);
        rep.params = rep.cost.params;
        rep.weight_payload_bytes = 0;
        for (const Param* p : nm.graph->params())
            if (p->quantizable) rep.weight_payload_bytes += p->value.size() * sizeof(float);
        rep.latency = benchmark_latency(*nm.graph, latency_frames, latency_reps);
        if (ds) rep.accuracy = accuracy_by_snr(*nm.graph, *ds);
        reports.push_back(std::move(rep));
    }
    const double base_flops = (double)reports[baseline].cost.mac_flops;
    const double base_params = (double)reports[baseline].params.total();
    for (ModelReport& rep : reports) {
        rep.flops_reduction_pct = 100.0 * (1.0 - (double)rep.cost.mac_flops / base_flops);
        rep.params_reduction_pct = 100.0 * (1.0 - (double)rep.params.total() / base_params);
    }
    return reports;
}

std::string model_reports_json(const std::vector<ModelReport>& reports) {
    ordered_json arr = ordered_json::array();
    for (const ModelReport& r : reports) {
        ordered_json j;
        j["name"] = r.name;
        j["mac_flops"] = r.cost.mac_flops;
        j["dense_macs"] = r.cost.dense_macs;
        j["profiler_style_flops"] = r.cost.profiler_style_flops();
        j["params_biasless"] = r.params.biasless();
        j["params_total"] = r.params.total();
        j["weight_payload_bytes"] = r.weight_payload_bytes;
        j["latency_ms_mean"] = r.latency.mean_ms;
        j["latency_ms_median"] = r.latency.median_ms;
        j["latency_ms_p95"] = r.latency.p95_ms;
        j["environment"] = r.latency.environment;
        j["flops_reduction_pct"] = r.flops_reduction_pct;
        j["params_reduction_pct"] = r.params_reduction_pct;
        if (!r.accuracy.empty()) {
            ordered_json acc = ordered_json::array();
            for (const SnrAccuracy& a : r.accuracy)
                acc.push_back({{"snr_db", a.snr_db},
                               {"mod_acc", a.mod_acc},
                               {"sig_acc", a.sig_acc},
                               {"count", a.count}});
            j["accuracy_by_snr"] = acc;
        }
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("spearman: length mismatch");
    if (a.size() < 2) throw NumericInputError("spearman: need at least two points");

    // Average ranks with ties.
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), (std::size_t)0);
        std::sort(order.begin(), order.end(),
                  [&v](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = ((double)i + (double)j) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const double n = (double)a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 1.0;  // constant ranks: treat as perfectly concordant
    return cov / std::sqrt(va * vb);
}

}  // namespace rfmtl
