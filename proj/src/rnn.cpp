#include "newsalpha/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "binary_io.hpp"
#include "newsalpha/errors.hpp"
#include "newsalpha/random.hpp"

namespace newsalpha {

std::string to_string(CellKind k) {
    switch (k) {
        case CellKind::Vanilla: return "vanilla";
        case CellKind::Lstm: return "lstm";
        case CellKind::Gru: return "gru";
    }
    return "?";
}

CellKind cell_kind_from_string(std::string_view s) {
    if (s == "vanilla" || s == "rnn") return CellKind::Vanilla;
    if (s == "lstm") return CellKind::Lstm;
    if (s == "gru") return CellKind::Gru;
    throw ConfigError("unknown cell kind '" + std::string(s) + "'");
}

RnnConfig RnnConfig::desk_scale() {
    RnnConfig c;
    c.layer_widths = {16, 8};
    return c;
}

void RnnConfig::validate() const {
    if (layer_widths.empty()) throw ConfigError("at least one recurrent layer is required");
    for (std::size_t i = 0; i < layer_widths.size(); ++i) {
        if (layer_widths[i] <= 0 || layer_widths[i] > 0x3FFF) throw ConfigError("layer widths must be in [1, 16383]");
        if (i && layer_widths[i] > layer_widths[i - 1]) throw ConfigError("layer widths must be non-increasing");
    }
    if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)");
    if (!(learning_rate >= 0)) throw ConfigError("learning rate must be non-negative");
    if (batch_size <= 0 || max_epochs <= 0 || patience <= 0) {
        throw ConfigError("batch size, epochs and patience must be positive");
    }
    if (!(min_improvement >= 0)) throw ConfigError("early-stopping tolerance must be non-negative");
}

Sequence Sequence::from_embedding(const HeadlineEmbedding& e) {
    validate_embedding(e);
    Sequence s;
    s.steps = e.rows;
    s.dim = e.cols;
    s.values.assign(e.values.begin(), e.values.end());
    return s;
}

namespace {

std::size_t gate_count(CellKind k) { return k == CellKind::Lstm ? 4 : k == CellKind::Gru ? 3 : 1; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out[r] += W[r, :] . x
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        double acc = 0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
}

// out[c] += sum_r W[r, c] y[r]
void gemv_t(const double* w, std::size_t rows, std::size_t cols, const double* y, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        double yr = y[r];
        if (yr == 0) continue;
        for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * yr;
    }
}

// G[r, c] += y[r] x[c]
void outer(double* g, std::size_t rows, std::size_t cols, const double* y, const double* x) {
    for (std::size_t r = 0; r < rows; ++r) {
        double yr = y[r];
        if (yr == 0) continue;
        double* row = g + r * cols;
        for (std::size_t c = 0; c < cols; ++c) row[c] += yr * x[c];
    }
}

struct LayerCache {
    std::vector<double> x;      // steps x in, as fed to the layer
    std::vector<double> h;      // (steps + 1) x hidden, row 0 is the zero state
    std::vector<double> c;      // LSTM cell state, same shape as h
    std::vector<double> gates;  // steps x gates*hidden, activated
    std::vector<double> uh_n;   // GRU: recurrent part of the candidate pre-activation
    std::vector<double> mask;   // dropout scale on this layer's output; empty when off
};

struct Pass {
    std::vector<LayerCache> layers;
    std::array<double, 2> logits{};
    double p_plus = 0.5;
};

void run_forward(const RnnModel& model, const Sequence& seq, bool training, std::uint64_t seed, Pass& pass) {
    if (seq.dim != model.input_dim()) {
        throw ShapeError("input has " + std::to_string(seq.dim) + " columns, model expects " +
                         std::to_string(model.input_dim()));
    }
    if (seq.steps == 0) throw ShapeError("empty input sequence");
    const auto& layers = model.layers();
    const double* p = model.params().data();
    const CellKind kind = model.config().cell;
    const std::size_t T = seq.steps;
    const double drop = model.config().dropout;
    const bool use_dropout = training && drop > 0;
    SplitMix64 rng(seed);

    pass.layers.resize(layers.size());
    const double* input = seq.values.data();
    std::vector<double> z, zh, dropped;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        auto& C = pass.layers[l];
        const std::size_t H = L.hidden, G = gate_count(kind) * H;
        C.x.assign(input, input + T * L.in);
        C.h.assign((T + 1) * H, 0.0);
        C.gates.resize(T * G);
        if (kind == CellKind::Lstm) C.c.assign((T + 1) * H, 0.0);
        if (kind == CellKind::Gru) C.uh_n.resize(T * H);
        z.resize(G);
        zh.resize(G);
        for (std::size_t t = 0; t < T; ++t) {
            const double* xt = &C.x[t * L.in];
            const double* hp = &C.h[t * H];
            double* hn = &C.h[(t + 1) * H];
            double* gt = &C.gates[t * G];
            std::copy(p + L.b.offset, p + L.b.offset + G, z.begin());
            gemv(p + L.w.offset, G, L.in, xt, z.data());
            if (kind == CellKind::Gru) {
                std::fill(zh.begin(), zh.end(), 0.0);
                gemv(p + L.u.offset, G, H, hp, zh.data());
            } else {
                gemv(p + L.u.offset, G, H, hp, z.data());
            }
            switch (kind) {
                case CellKind::Vanilla:
                    for (std::size_t k = 0; k < H; ++k) gt[k] = hn[k] = std::tanh(z[k]);
                    break;
                case CellKind::Lstm: {
                    const double* cp = &C.c[t * H];
                    double* cn = &C.c[(t + 1) * H];
                    for (std::size_t k = 0; k < H; ++k) {
                        double i = sigmoid(z[k]), f = sigmoid(z[H + k]);
                        double g = std::tanh(z[2 * H + k]), o = sigmoid(z[3 * H + k]);
                        gt[k] = i;
                        gt[H + k] = f;
                        gt[2 * H + k] = g;
                        gt[3 * H + k] = o;
                        cn[k] = f * cp[k] + i * g;
                        hn[k] = o * std::tanh(cn[k]);
                    }
                    break;
                }
                case CellKind::Gru:
                    for (std::size_t k = 0; k < H; ++k) {
                        double u = sigmoid(z[k] + zh[k]);
                        double r = sigmoid(z[H + k] + zh[H + k]);
                        double n = std::tanh(z[2 * H + k] + r * zh[2 * H + k]);
                        gt[k] = u;
                        gt[H + k] = r;
                        gt[2 * H + k] = n;
                        C.uh_n[t * H + k] = zh[2 * H + k];
                        hn[k] = (1 - u) * n + u * hp[k];
                    }
                    break;
            }
        }
        input = C.h.data() + H;
        C.mask.clear();
        if (use_dropout && l + 1 < layers.size()) {
            // Inverted dropout between recurrent layers.
            C.mask.resize(T * H);
            double keep_scale = 1.0 / (1.0 - drop);
            for (auto& m : C.mask) m = rng.uniform() < drop ? 0.0 : keep_scale;
            dropped.assign(input, input + T * H);
            for (std::size_t k = 0; k < T * H; ++k) dropped[k] *= C.mask[k];
            input = dropped.data();  // copied into the next layer's cache before reuse
        }
    }
    const auto& top = layers.back();
    const double* h_last = &pass.layers.back().h[T * top.hidden];
    const auto& hw = model.head_weights();
    const auto& hb = model.head_bias();
    pass.logits = {p[hb.offset], p[hb.offset + 1]};
    gemv(p + hw.offset, 2, top.hidden, h_last, pass.logits.data());
    pass.p_plus = 1.0 / (1.0 + std::exp(pass.logits[0] - pass.logits[1]));
}

void run_backward(const RnnModel& model, const Pass& pass, std::array<double, 2> dlogits, double* grad) {
    const auto& layers = model.layers();
    const double* p = model.params().data();
    const CellKind kind = model.config().cell;
    const auto& top = layers.back();
    const std::size_t T = (pass.layers.back().h.size() / top.hidden) - 1;

    const auto& hw = model.head_weights();
    const auto& hb = model.head_bias();
    const double* h_last = &pass.layers.back().h[T * top.hidden];
    outer(grad + hw.offset, 2, top.hidden, dlogits.data(), h_last);
    grad[hb.offset] += dlogits[0];
    grad[hb.offset + 1] += dlogits[1];

    std::vector<double> d_out(T * top.hidden, 0.0);
    gemv_t(p + hw.offset, 2, top.hidden, dlogits.data(), &d_out[(T - 1) * top.hidden]);

    std::vector<double> d_in, dh, dh_next, dc_next, dz, dzh;
    for (std::size_t li = layers.size(); li-- > 0;) {
        const auto& L = layers[li];
        const auto& C = pass.layers[li];
        const std::size_t H = L.hidden, G = gate_count(kind) * H;
        d_in.assign(T * L.in, 0.0);
        dh.assign(H, 0.0);
        dh_next.assign(H, 0.0);
        dc_next.assign(H, 0.0);
        dz.assign(G, 0.0);
        dzh.assign(G, 0.0);
        for (std::size_t t = T; t-- > 0;) {
            const double* xt = &C.x[t * L.in];
            const double* hp = &C.h[t * H];
            const double* hn = &C.h[(t + 1) * H];
            const double* gt = &C.gates[t * G];
            for (std::size_t k = 0; k < H; ++k) dh[k] = d_out[t * H + k] + dh_next[k];
            std::fill(dh_next.begin(), dh_next.end(), 0.0);
            switch (kind) {
                case CellKind::Vanilla:
                    for (std::size_t k = 0; k < H; ++k) dz[k] = dh[k] * (1 - hn[k] * hn[k]);
                    break;
                case CellKind::Lstm: {
                    const double* cp = &C.c[t * H];
                    const double* cn = &C.c[(t + 1) * H];
                    for (std::size_t k = 0; k < H; ++k) {
                        double i = gt[k], f = gt[H + k], g = gt[2 * H + k], o = gt[3 * H + k];
                        double tc = std::tanh(cn[k]);
                        double dc = dc_next[k] + dh[k] * o * (1 - tc * tc);
                        dz[k] = dc * g * i * (1 - i);
                        dz[H + k] = dc * cp[k] * f * (1 - f);
                        dz[2 * H + k] = dc * i * (1 - g * g);
                        dz[3 * H + k] = dh[k] * tc * o * (1 - o);
                        dc_next[k] = dc * f;
                    }
                    break;
                }
                case CellKind::Gru:
                    for (std::size_t k = 0; k < H; ++k) {
                        double u = gt[k], r = gt[H + k], n = gt[2 * H + k];
                        double dn = dh[k] * (1 - u);
                        double du = dh[k] * (hp[k] - n);
                        double da_n = dn * (1 - n * n);
                        double dr = da_n * C.uh_n[t * H + k];
                        dz[k] = du * u * (1 - u);
                        dz[H + k] = dr * r * (1 - r);
                        dz[2 * H + k] = da_n;
                        dzh[k] = dz[k];
                        dzh[H + k] = dz[H + k];
                        dzh[2 * H + k] = da_n * r;
                        dh_next[k] = dh[k] * u;
                    }
                    break;
            }
            const double* dz_rec = kind == CellKind::Gru ? dzh.data() : dz.data();
            outer(grad + L.w.offset, G, L.in, dz.data(), xt);
            outer(grad + L.u.offset, G, H, dz_rec, hp);
            for (std::size_t k = 0; k < G; ++k) grad[L.b.offset + k] += dz[k];
            gemv_t(p + L.w.offset, G, L.in, dz.data(), &d_in[t * L.in]);
            gemv_t(p + L.u.offset, G, H, dz_rec, dh_next.data());
        }
        if (li == 0) break;
        const auto& below = pass.layers[li - 1];
        d_out = d_in;
        if (!below.mask.empty()) {
            for (std::size_t k = 0; k < d_out.size(); ++k) d_out[k] *= below.mask[k];
        }
    }
}

// Clamped binary cross-entropy of one prediction and its logit gradient.
double sample_loss(double p_plus, int label, std::array<double, 2>* dlogits) {
    double pc = std::clamp(p_plus, kLossClamp, 1.0 - kLossClamp);
    double l = label == 1 ? -std::log(pc) : -std::log(1.0 - pc);
    if (dlogits) {
        bool clamped = p_plus < kLossClamp || p_plus > 1.0 - kLossClamp;
        double d = clamped ? 0.0 : p_plus - label;
        *dlogits = {-d, d};
    }
    return l;
}

void check_batch(std::span<const LabeledSequence> batch) {
    for (const auto& s : batch) {
        if (s.label != 0 && s.label != 1) throw ConfigError("labels must be 0 or 1");
    }
}

}  // namespace

RnnModel::RnnModel(RnnConfig config, std::size_t input_dim) : config_(std::move(config)), input_dim_(input_dim) {
    config_.validate();
    if (input_dim == 0) throw ShapeError("input dimension must be positive");
    const std::size_t G = gate_count(config_.cell);
    std::size_t offset = 0;
    auto block = [&](std::size_t rows, std::size_t cols) {
        ParamBlock b{offset, rows, cols};
        offset += rows * cols;
        return b;
    };
    std::size_t in = input_dim;
    for (int width : config_.layer_widths) {
        auto h = static_cast<std::size_t>(width);
        Layer L{in, h, {}, {}, {}};
        L.w = block(G * h, in);
        L.u = block(G * h, h);
        L.b = block(G * h, 1);
        layers_.push_back(L);
        in = h;
    }
    head_w_ = block(2, in);
    head_b_ = block(2, 1);
    params_.assign(offset, 0.0);
}

std::size_t RnnModel::gates() const noexcept { return gate_count(config_.cell); }

void RnnModel::initialize(std::uint64_t seed) {
    SplitMix64 rng(seed);
    auto fill = [&](const ParamBlock& b, std::size_t fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t k = 0; k < b.size(); ++k) params_[b.offset + k] = (2.0 * rng.uniform() - 1.0) * bound;
    };
    for (const auto& L : layers_) {
        fill(L.w, L.in);
        fill(L.u, L.hidden);
        fill(L.b, L.in);
    }
    fill(head_w_, layers_.back().hidden);
    fill(head_b_, layers_.back().hidden);
}

void RnnModel::round_to_float() {
    for (auto& v : params_) v = static_cast<double>(static_cast<float>(v));
}

bool RnnModel::operator==(const RnnModel& other) const {
    const auto& a = config_;
    const auto& b = other.config_;
    return a.cell == b.cell && a.layer_widths == b.layer_widths && a.dropout == b.dropout && a.seed == b.seed &&
           a.learning_rate == b.learning_rate && a.batch_size == b.batch_size && a.max_epochs == b.max_epochs &&
           a.patience == b.patience && a.min_improvement == b.min_improvement && input_dim_ == other.input_dim_ &&
           params_ == other.params_;
}

double forward(const RnnModel& model, const Sequence& input, bool training_mode, std::uint64_t dropout_seed) {
    Pass pass;
    run_forward(model, input, training_mode, dropout_seed, pass);
    return pass.p_plus;
}

double forward(const RnnModel& model, const HeadlineEmbedding& embedding, bool training_mode,
               std::uint64_t dropout_seed) {
    return forward(model, Sequence::from_embedding(embedding), training_mode, dropout_seed);
}

std::array<double, 2> forward_probabilities(const RnnModel& model, const Sequence& input) {
    Pass pass;
    run_forward(model, input, false, 0, pass);
    double d = pass.logits[1] - pass.logits[0];
    return {1.0 / (1.0 + std::exp(d)), 1.0 / (1.0 + std::exp(-d))};
}

double loss(const RnnModel& model, std::span<const LabeledSequence> batch) {
    if (batch.empty()) return 0.0;
    check_batch(batch);
    Pass pass;
    double total = 0;
    for (const auto& s : batch) {
        run_forward(model, s.input, false, 0, pass);
        total += sample_loss(pass.p_plus, s.label, nullptr);
    }
    return total / static_cast<double>(batch.size());
}

double loss_and_gradient(const RnnModel& model, std::span<const LabeledSequence> batch, std::span<double> grad,
                         bool training_mode, std::uint64_t dropout_seed) {
    if (grad.size() != model.parameter_count()) throw ShapeError("gradient buffer has the wrong size");
    std::fill(grad.begin(), grad.end(), 0.0);
    if (batch.empty()) return 0.0;
    check_batch(batch);
    Pass pass;
    double total = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        run_forward(model, batch[i].input, training_mode, dropout_seed + i, pass);
        std::array<double, 2> dlogits{};
        total += sample_loss(pass.p_plus, batch[i].label, &dlogits);
        run_backward(model, pass, dlogits, grad.data());
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& g : grad) g *= inv;
    return total * inv;
}

double gradient_check(const RnnModel& model, std::span<const LabeledSequence> batch, double eps) {
    std::vector<double> analytic(model.parameter_count());
    loss_and_gradient(model, batch, analytic);
    RnnModel probe = model;
    auto params = probe.params();
    double worst = 0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        double saved = params[k];
        params[k] = saved + eps;
        double up = loss(probe, batch);
        params[k] = saved - eps;
        double down = loss(probe, batch);
        params[k] = saved;
        double fd = (up - down) / (2 * eps);
        double denom = std::max({std::abs(analytic[k]), std::abs(fd), 1e-8});
        worst = std::max(worst, std::abs(analytic[k] - fd) / denom);
    }
    return worst;
}

TrainingResult train(const RnnConfig& config, std::span<const LabeledSequence> train_set,
                     std::span<const LabeledSequence> dev) {
    config.validate();
    std::array<std::size_t, 2> seen{0, 0};
    for (const auto& s : train_set) {
        if (s.label != 0 && s.label != 1) throw DegenerateTraining("labels must be 0 or 1");
        ++seen[s.label];
    }
    if (seen[0] == 0 || seen[1] == 0) throw DegenerateTraining("training set must contain both classes");
    const std::size_t dim = train_set.front().input.dim;
    for (const auto& s : train_set) {
        if (s.input.dim != dim) throw ShapeError("training sequences disagree on their dimension");
    }

    RnnModel model(config, dim);
    model.initialize(config.seed);
    std::span<const LabeledSequence> monitor = dev.empty() ? train_set : dev;

    TrainingResult result;
    double best = loss(model, monitor);
    result.model = model;
    result.history.push_back({0, loss(model, train_set), best});

    SplitMix64 order_rng(config.seed ^ 0xA5A5A5A55A5A5A5AULL);
    std::uint64_t dropout_stream = config.seed * 0x9E3779B97F4A7C15ULL + 1;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(model.parameter_count()), batch_grad(model.parameter_count());
    std::vector<LabeledSequence> batch;
    int stale = 0;
    const auto bsz = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle(order.begin(), order.end(), order_rng);
        double epoch_loss = 0;
        for (std::size_t start = 0; start < order.size(); start += bsz) {
            std::size_t end = std::min(order.size(), start + bsz);
            std::fill(grad.begin(), grad.end(), 0.0);
            Pass pass;
            for (std::size_t j = start; j < end; ++j) {
                const auto& s = train_set[order[j]];
                run_forward(model, s.input, true, dropout_stream++, pass);
                std::array<double, 2> dlogits{};
                epoch_loss += sample_loss(pass.p_plus, s.label, &dlogits);
                run_backward(model, pass, dlogits, grad.data());
            }
            double step = config.learning_rate / static_cast<double>(end - start);
            auto params = model.params();
            for (std::size_t k = 0; k < params.size(); ++k) params[k] -= step * grad[k];
        }
        double dev_loss = loss(model, monitor);
        result.history.push_back({epoch, epoch_loss / static_cast<double>(order.size()), dev_loss});
        if (dev_loss < best - config.min_improvement) {
            best = dev_loss;
            result.model = model;
            result.best_epoch = epoch;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    result.model.round_to_float();
    return result;
}

namespace {
constexpr std::array<char, 4> kRnnMagic{'R', 'N', 'N', '1'};

void put_matrix(std::ostream& out, std::span<const double> params, const ParamBlock& b) {
    if (b.rows > 0xFFFF || b.cols > 0xFFFF) throw ShapeError("parameter matrix too large for checkpoint");
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(b.rows));
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(b.cols));
    for (std::size_t k = 0; k < b.size(); ++k) detail::put_f32(out, static_cast<float>(params[b.offset + k]));
}

void get_matrix(std::istream& in, std::span<double> params, const ParamBlock& b) {
    auto rows = detail::get_le<std::uint16_t>(in, "matrix rows");
    auto cols = detail::get_le<std::uint16_t>(in, "matrix cols");
    if (rows != b.rows || cols != b.cols) throw ShapeError("checkpoint matrix shape disagrees with its config");
    for (std::size_t k = 0; k < b.size(); ++k) params[b.offset + k] = detail::get_f32(in, "parameter");
}
}  // namespace

void write_checkpoint(std::ostream& out, const RnnModel& model) {
    const auto& c = model.config();
    out.write(kRnnMagic.data(), kRnnMagic.size());
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(c.cell));
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(c.layer_widths.size()));
    for (int w : c.layer_widths) detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(w));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_dim()));
    detail::put_f64(out, c.dropout);
    detail::put_le<std::uint64_t>(out, c.seed);
    detail::put_f64(out, c.learning_rate);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.batch_size));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.max_epochs));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.patience));
    detail::put_f64(out, c.min_improvement);
    auto params = model.params();
    for (const auto& L : model.layers()) {
        put_matrix(out, params, L.w);
        put_matrix(out, params, L.u);
        put_matrix(out, params, L.b);
    }
    put_matrix(out, params, model.head_weights());
    put_matrix(out, params, model.head_bias());
    if (!out) throw FormatError("write failure on checkpoint sink");
}

RnnModel read_checkpoint(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != 4) throw Truncated("checkpoint shorter than its magic");
    if (magic != kRnnMagic) throw BadMagic("expected \"RNN1\"");
    RnnConfig c;
    auto cell = detail::get_le<std::uint8_t>(in, "cell kind");
    if (cell > 2) throw ShapeError("unknown cell kind " + std::to_string(cell));
    c.cell = static_cast<CellKind>(cell);
    auto n_layers = detail::get_le<std::uint16_t>(in, "layer count");
    c.layer_widths.clear();
    for (std::uint16_t i = 0; i < n_layers; ++i) c.layer_widths.push_back(detail::get_le<std::uint16_t>(in, "width"));
    auto input_dim = detail::get_le<std::uint32_t>(in, "input dimension");
    c.dropout = detail::get_f64(in, "dropout");
    c.seed = detail::get_le<std::uint64_t>(in, "seed");
    c.learning_rate = detail::get_f64(in, "learning rate");
    c.batch_size = static_cast<int>(detail::get_le<std::uint32_t>(in, "batch size"));
    c.max_epochs = static_cast<int>(detail::get_le<std::uint32_t>(in, "max epochs"));
    c.patience = static_cast<int>(detail::get_le<std::uint32_t>(in, "patience"));
    c.min_improvement = detail::get_f64(in, "tolerance");
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ShapeError(std::string("checkpoint config is invalid: ") + e.what());
    }
    RnnModel model(c, input_dim);
    auto params = model.params();
    for (const auto& L : model.layers()) {
        get_matrix(in, params, L.w);
        get_matrix(in, params, L.u);
        get_matrix(in, params, L.b);
    }
    get_matrix(in, params, model.head_weights());
    get_matrix(in, params, model.head_bias());
    return model;
}

}  // namespace newsalpha
