#include "tdfmatch/net.hpp"

#include "tdfmatch/rng.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tdfmatch {

Tensor4 patch_to_tensor(const TdfPatch& patch) {
    const int d = patch.config.grid_dim;
    Tensor4 t(1, d, d, d);
    for (size_t i = 0; i < patch.values.size(); ++i) {
        t.data[i] = static_cast<double>(patch.values[i]);
    }
    return t;
}

LayerSpec LayerSpec::conv(int kernel, int out_channels, int stride) {
    LayerSpec l;
    l.kind = Kind::Conv3d;
    l.kernel = kernel;
    l.out_channels = out_channels;
    l.stride = stride;
    return l;
}

LayerSpec LayerSpec::relu() {
    LayerSpec l;
    l.kind = Kind::Relu;
    return l;
}

LayerSpec LayerSpec::pool(int window, int stride) {
    LayerSpec l;
    l.kind = Kind::MaxPool3d;
    l.window = window;
    l.stride = stride;
    return l;
}

NetworkSpec NetworkSpec::standard(bool final_relu) {
    NetworkSpec s;
    s.in_channels = 1;
    s.input_dim = 30;
    s.descriptor_dim = 512;
    const int filters[8] = {64, 64, 128, 128, 256, 256, 512, 512};
    for (int i = 0; i < 8; ++i) {
        s.layers.push_back(LayerSpec::conv(3, filters[i]));
        if (i + 1 < 8 || final_relu) s.layers.push_back(LayerSpec::relu());
        if (i == 1) s.layers.push_back(LayerSpec::pool(2, 2));
    }
    return s;
}

NetworkSpec NetworkSpec::reduced(bool final_relu) {
    NetworkSpec s;
    s.in_channels = 1;
    s.input_dim = 30;
    s.descriptor_dim = 64;
    s.layers.push_back(LayerSpec::conv(4, 12, 2));
    s.layers.push_back(LayerSpec::relu());
    s.layers.push_back(LayerSpec::pool(2, 2));
    s.layers.push_back(LayerSpec::conv(3, 24));
    s.layers.push_back(LayerSpec::relu());
    s.layers.push_back(LayerSpec::conv(3, 48));
    s.layers.push_back(LayerSpec::relu());
    s.layers.push_back(LayerSpec::conv(3, 64));
    if (final_relu) s.layers.push_back(LayerSpec::relu());
    return s;
}

std::vector<std::array<int, 4>> NetworkSpec::shapes() const {
    std::vector<std::array<int, 4>> out;
    out.push_back({in_channels, input_dim, input_dim, input_dim});
    for (size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        std::array<int, 4> cur = out.back();
        const auto bad = [&](const std::string& what) {
            throw std::runtime_error("layer " + std::to_string(i + 1) + " (" +
                                     (l.kind == LayerSpec::Kind::Conv3d
                                          ? "conv3d"
                                          : l.kind == LayerSpec::Kind::Relu ? "relu" : "maxpool3d") +
                                     "): " + what);
        };
        switch (l.kind) {
            case LayerSpec::Kind::Conv3d: {
                if (l.kernel < 1 || l.out_channels < 1 || l.stride < 1) bad("invalid parameters");
                if (cur[1] < l.kernel) bad("input smaller than kernel");
                const int d = (cur[1] - l.kernel) / l.stride + 1;
                cur = {l.out_channels, d, d, d};
                break;
            }
            case LayerSpec::Kind::Relu:
                break;
            case LayerSpec::Kind::MaxPool3d: {
                if (l.window < 1 || l.stride < 1) bad("invalid parameters");
                if (cur[1] < l.window) bad("input smaller than window");
                const int d = (cur[1] - l.window) / l.stride + 1;
                cur = {cur[0], d, d, d};
                break;
            }
        }
        out.push_back(cur);
    }
    return out;
}

void NetworkSpec::validate() const {
    const auto all = shapes();
    const std::array<int, 4>& last = all.back();
    const long flat = static_cast<long>(last[0]) * last[1] * last[2] * last[3];
    if (flat != descriptor_dim) {
        throw std::runtime_error("final activation flattens to " + std::to_string(flat) +
                                 " values, descriptor_dim is " + std::to_string(descriptor_dim));
    }
}

std::string NetworkSpec::serialize() const {
    std::ostringstream out;
    out << "input " << in_channels << " " << input_dim << "\n";
    for (const LayerSpec& l : layers) {
        switch (l.kind) {
            case LayerSpec::Kind::Conv3d:
                out << "conv " << l.kernel << " " << l.out_channels << " " << l.stride << "\n";
                break;
            case LayerSpec::Kind::Relu:
                out << "relu\n";
                break;
            case LayerSpec::Kind::MaxPool3d:
                out << "pool " << l.window << " " << l.stride << "\n";
                break;
        }
    }
    out << "descriptor " << descriptor_dim << "\n";
    return out.str();
}

NetworkSpec NetworkSpec::parse(const std::string& text) {
    NetworkSpec s;
    s.layers.clear();
    s.descriptor_dim = 0;
    std::istringstream in(text);
    std::string line;
    bool have_input = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw) || kw[0] == '#') continue;
        if (kw == "input") {
            if (!(ls >> s.in_channels >> s.input_dim)) {
                throw std::runtime_error("network spec: malformed input line");
            }
            have_input = true;
        } else if (kw == "conv") {
            int k, oc, st = 1;
            if (!(ls >> k >> oc)) throw std::runtime_error("network spec: malformed conv line");
            ls >> st;
            s.layers.push_back(LayerSpec::conv(k, oc, st));
        } else if (kw == "relu") {
            s.layers.push_back(LayerSpec::relu());
        } else if (kw == "pool") {
            int w, st;
            if (!(ls >> w >> st)) throw std::runtime_error("network spec: malformed pool line");
            s.layers.push_back(LayerSpec::pool(w, st));
        } else if (kw == "descriptor") {
            if (!(ls >> s.descriptor_dim)) {
                throw std::runtime_error("network spec: malformed descriptor line");
            }
        } else {
            throw std::runtime_error("network spec: unknown keyword " + kw);
        }
    }
    if (!have_input || s.descriptor_dim <= 0) {
        throw std::runtime_error("network spec: missing input or descriptor line");
    }
    s.validate();
    return s;
}

Parameters init_xavier(const NetworkSpec& spec, uint64_t seed) {
    spec.validate();
    const auto all = spec.shapes();
    Parameters params;
    Rng rng(seed);
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (l.kind != LayerSpec::Kind::Conv3d) continue;
        ConvParam p;
        p.in_channels = all[i][0];
        p.out_channels = l.out_channels;
        p.kernel = l.kernel;
        const size_t k3 = static_cast<size_t>(l.kernel) * l.kernel * l.kernel;
        const double fan_in = static_cast<double>(k3 * p.in_channels);
        const double fan_out = static_cast<double>(k3 * p.out_channels);
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        p.w.resize(k3 * p.in_channels * p.out_channels);
        for (double& w : p.w) w = rng.uniform(-bound, bound);
        p.b.assign(p.out_channels, 0.0);
        p.vw.assign(p.w.size(), 0.0);
        p.vb.assign(p.b.size(), 0.0);
        params.conv.push_back(std::move(p));
    }
    return params;
}

namespace {

Tensor4 conv_forward(const Tensor4& in, const ConvParam& p, int stride) {
    const int od = (in.dx - p.kernel) / stride + 1;
    Tensor4 out(p.out_channels, od, od, od);
    const int k = p.kernel;
    const size_t in_plane = static_cast<size_t>(in.dx) * in.dy;
    const size_t out_plane = static_cast<size_t>(od) * od;
    for (int oc = 0; oc < p.out_channels; ++oc) {
        double* ob = out.data.data() + out.index(oc, 0, 0, 0);
        const double bias = p.b[oc];
        for (size_t i = 0; i < out_plane * od; ++i) ob[i] = bias;
        for (int ic = 0; ic < p.in_channels; ++ic) {
            const double* ib = in.data.data() + in.index(ic, 0, 0, 0);
            for (int kz = 0; kz < k; ++kz) {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = p.w[p.weight_index(oc, ic, kx, ky, kz)];
                        for (int oz = 0; oz < od; ++oz) {
                            const double* irow0 = ib + (oz * stride + kz) * in_plane;
                            double* orow0 = ob + oz * out_plane;
                            for (int oy = 0; oy < od; ++oy) {
                                const double* irow = irow0 + (oy * stride + ky) * in.dx + kx;
                                double* orow = orow0 + oy * od;
                                if (stride == 1) {
                                    for (int ox = 0; ox < od; ++ox) orow[ox] += wv * irow[ox];
                                } else {
                                    for (int ox = 0; ox < od; ++ox) {
                                        orow[ox] += wv * irow[ox * stride];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

void conv_backward(const Tensor4& in, const ConvParam& p, int stride, const Tensor4& grad_out,
                   ConvGrad& grad, Tensor4& grad_in) {
    const int od = grad_out.dx;
    const int k = p.kernel;
    const size_t in_plane = static_cast<size_t>(in.dx) * in.dy;
    const size_t out_plane = static_cast<size_t>(od) * od;
    grad.w.assign(p.w.size(), 0.0);
    grad.b.assign(p.b.size(), 0.0);
    for (int oc = 0; oc < p.out_channels; ++oc) {
        const double* gob = grad_out.data.data() + grad_out.index(oc, 0, 0, 0);
        double acc_b = 0.0;
        for (size_t i = 0; i < out_plane * od; ++i) acc_b += gob[i];
        grad.b[oc] = acc_b;
        for (int ic = 0; ic < p.in_channels; ++ic) {
            const double* ib = in.data.data() + in.index(ic, 0, 0, 0);
            double* gib = grad_in.data.data() + grad_in.index(ic, 0, 0, 0);
            for (int kz = 0; kz < k; ++kz) {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = p.w[p.weight_index(oc, ic, kx, ky, kz)];
                        double acc_w = 0.0;
                        for (int oz = 0; oz < od; ++oz) {
                            const double* irow0 = ib + (oz * stride + kz) * in_plane;
                            double* girow0 = gib + (oz * stride + kz) * in_plane;
                            const double* gorow0 = gob + oz * out_plane;
                            for (int oy = 0; oy < od; ++oy) {
                                const size_t in_off = (oy * stride + ky) * in.dx + kx;
                                const double* irow = irow0 + in_off;
                                double* girow = girow0 + in_off;
                                const double* gorow = gorow0 + oy * od;
                                for (int ox = 0; ox < od; ++ox) {
                                    const double g = gorow[ox];
                                    acc_w += g * irow[ox * stride];
                                    girow[ox * stride] += g * wv;
                                }
                            }
                        }
                        grad.w[p.weight_index(oc, ic, kx, ky, kz)] = acc_w;
                    }
                }
            }
        }
    }
}

Tensor4 pool_forward(const Tensor4& in, int window, int stride, std::vector<int32_t>* argmax) {
    const int od = (in.dx - window) / stride + 1;
    Tensor4 out(in.channels, od, od, od);
    if (argmax) argmax->resize(out.size());
    size_t oi = 0;
    for (int c = 0; c < in.channels; ++c) {
        for (int oz = 0; oz < od; ++oz) {
            for (int oy = 0; oy < od; ++oy) {
                for (int ox = 0; ox < od; ++ox, ++oi) {
                    double best = -std::numeric_limits<double>::infinity();
                    size_t best_idx = 0;
                    // Scan in increasing linear index order; strict > keeps
                    // the lowest-index element on ties.
                    for (int wz = 0; wz < window; ++wz) {
                        for (int wy = 0; wy < window; ++wy) {
                            for (int wx = 0; wx < window; ++wx) {
                                const size_t ii = in.index(c, ox * stride + wx, oy * stride + wy,
                                                           oz * stride + wz);
                                if (in.data[ii] > best) {
                                    best = in.data[ii];
                                    best_idx = ii;
                                }
                            }
                        }
                    }
                    out.data[oi] = best;
                    if (argmax) (*argmax)[oi] = static_cast<int32_t>(best_idx);
                }
            }
        }
    }
    return out;
}

Tensor4 relu_forward(const Tensor4& in) {
    Tensor4 out = in;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

}  // namespace

Descriptor forward(const NetworkSpec& spec, const Parameters& params, const Tensor4& input,
                   ForwardCache* cache) {
    if (input.channels != spec.in_channels || input.dx != spec.input_dim ||
        input.dy != spec.input_dim || input.dz != spec.input_dim) {
        throw std::runtime_error("input shape does not match network spec");
    }
    size_t conv_idx = 0;
    if (cache) {
        cache->acts.clear();
        cache->pool_argmax.clear();
        cache->acts.push_back(input);
    }
    Tensor4 cur = input;
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        switch (l.kind) {
            case LayerSpec::Kind::Conv3d: {
                if (conv_idx >= params.conv.size()) {
                    throw std::runtime_error("parameters missing conv layer " +
                                             std::to_string(conv_idx));
                }
                const ConvParam& p = params.conv[conv_idx++];
                if (p.in_channels != cur.channels || p.kernel != l.kernel ||
                    p.out_channels != l.out_channels) {
                    throw std::runtime_error("layer " + std::to_string(i + 1) +
                                             " (conv3d): parameter shape mismatch");
                }
                if (cur.dx < l.kernel) {
                    throw std::runtime_error("layer " + std::to_string(i + 1) +
                                             " (conv3d): input smaller than kernel");
                }
                cur = conv_forward(cur, p, l.stride);
                break;
            }
            case LayerSpec::Kind::Relu:
                cur = relu_forward(cur);
                break;
            case LayerSpec::Kind::MaxPool3d: {
                if (cur.dx < l.window) {
                    throw std::runtime_error("layer " + std::to_string(i + 1) +
                                             " (maxpool3d): input smaller than window");
                }
                std::vector<int32_t> argmax;
                cur = pool_forward(cur, l.window, l.stride, cache ? &argmax : nullptr);
                if (cache) cache->pool_argmax.push_back(std::move(argmax));
                break;
            }
        }
        if (cache) cache->acts.push_back(cur);
    }
    if (static_cast<long>(cur.size()) != spec.descriptor_dim) {
        throw std::runtime_error("final activation size " + std::to_string(cur.size()) +
                                 " does not match descriptor_dim " +
                                 std::to_string(spec.descriptor_dim));
    }
    return cur.data;
}

ContrastiveResult contrastive_loss(const Descriptor& d1, const Descriptor& d2, bool is_match,
                                   double margin) {
    if (d1.size() != d2.size()) throw std::runtime_error("descriptor dimension mismatch");
    if (!(margin > 0.0)) throw std::runtime_error("margin must be positive");
    const size_t n = d1.size();
    ContrastiveResult r;
    r.grad_d1.assign(n, 0.0);
    r.grad_d2.assign(n, 0.0);
    double sq = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = d1[i] - d2[i];
        sq += d * d;
    }
    const double dist = std::sqrt(sq);
    if (is_match) {
        r.loss = 0.5 * sq;
        for (size_t i = 0; i < n; ++i) {
            const double d = d1[i] - d2[i];
            r.grad_d1[i] = d;
            r.grad_d2[i] = -d;
        }
    } else {
        const double gap = margin - dist;
        if (gap > 0.0) {
            r.loss = 0.5 * gap * gap;
            if (dist > 0.0) {
                const double scale = -gap / dist;
                for (size_t i = 0; i < n; ++i) {
                    const double d = d1[i] - d2[i];
                    r.grad_d1[i] = scale * d;
                    r.grad_d2[i] = -scale * d;
                }
            }
            // dist == 0: zero subgradient.
        }
    }
    return r;
}

Gradients backward(const NetworkSpec& spec, const Parameters& params, const ForwardCache& cache,
                   const Descriptor& grad_descriptor) {
    if (cache.acts.size() != spec.layers.size() + 1) {
        throw std::runtime_error("cache does not match network spec");
    }
    if (static_cast<long>(grad_descriptor.size()) != spec.descriptor_dim) {
        throw std::runtime_error("descriptor gradient dimension mismatch");
    }
    Gradients grads;
    grads.conv.resize(params.conv.size());

    Tensor4 grad = cache.acts.back();
    grad.data.assign(grad_descriptor.begin(), grad_descriptor.end());

    size_t conv_idx = params.conv.size();
    size_t pool_idx = cache.pool_argmax.size();
    for (size_t li = spec.layers.size(); li-- > 0;) {
        const LayerSpec& l = spec.layers[li];
        const Tensor4& in = cache.acts[li];
        switch (l.kind) {
            case LayerSpec::Kind::Conv3d: {
                --conv_idx;
                Tensor4 gin(in.channels, in.dx, in.dy, in.dz);
                conv_backward(in, params.conv[conv_idx], l.stride, grad, grads.conv[conv_idx], gin);
                grad = std::move(gin);
                break;
            }
            case LayerSpec::Kind::Relu: {
                for (size_t i = 0; i < grad.data.size(); ++i) {
                    if (!(in.data[i] > 0.0)) grad.data[i] = 0.0;
                }
                break;
            }
            case LayerSpec::Kind::MaxPool3d: {
                --pool_idx;
                const std::vector<int32_t>& argmax = cache.pool_argmax[pool_idx];
                Tensor4 gin(in.channels, in.dx, in.dy, in.dz);
                for (size_t i = 0; i < grad.data.size(); ++i) {
                    gin.data[static_cast<size_t>(argmax[i])] += grad.data[i];
                }
                grad = std::move(gin);
                break;
            }
        }
    }
    grads.input = std::move(grad);
    return grads;
}

double train_step(const NetworkSpec& spec, Parameters& params,
                  const std::vector<TrainingPair>& batch, const TrainConfig& cfg) {
    if (batch.empty()) throw std::runtime_error("empty batch");
    size_t matches = 0;
    for (const TrainingPair& p : batch) matches += p.is_match ? 1 : 0;
    if (matches * 2 != batch.size()) {
        throw std::runtime_error("batch must hold a 1:1 ratio of matches to non-matches");
    }

    std::vector<ConvGrad> total(params.conv.size());
    for (size_t li = 0; li < params.conv.size(); ++li) {
        total[li].w.assign(params.conv[li].w.size(), 0.0);
        total[li].b.assign(params.conv[li].b.size(), 0.0);
    }
    double total_loss = 0.0;

    for (const TrainingPair& pair : batch) {
        ForwardCache cache_a, cache_b;
        const Descriptor da = forward(spec, params, patch_to_tensor(*pair.a), &cache_a);
        const Descriptor db = forward(spec, params, patch_to_tensor(*pair.b), &cache_b);
        const ContrastiveResult cr = contrastive_loss(da, db, pair.is_match,
                                                      cfg.contrastive_margin);
        total_loss += cr.loss;
        const Gradients ga = backward(spec, params, cache_a, cr.grad_d1);
        const Gradients gb = backward(spec, params, cache_b, cr.grad_d2);
        for (size_t li = 0; li < total.size(); ++li) {
            for (size_t i = 0; i < total[li].w.size(); ++i) {
                total[li].w[i] += ga.conv[li].w[i] + gb.conv[li].w[i];
            }
            for (size_t i = 0; i < total[li].b.size(); ++i) {
                total[li].b[i] += ga.conv[li].b[i] + gb.conv[li].b[i];
            }
        }
    }

    const double mean_loss = total_loss / static_cast<double>(batch.size());
    if (!std::isfinite(mean_loss)) throw std::runtime_error("divergence");

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (size_t li = 0; li < params.conv.size(); ++li) {
        ConvParam& p = params.conv[li];
        for (size_t i = 0; i < p.w.size(); ++i) {
            const double g = total[li].w[i] * inv_n + cfg.weight_decay * p.w[i];
            p.vw[i] = cfg.momentum * p.vw[i] - cfg.learning_rate * g;
            p.w[i] += p.vw[i];
        }
        for (size_t i = 0; i < p.b.size(); ++i) {
            const double g = total[li].b[i] * inv_n + cfg.weight_decay * p.b[i];
            p.vb[i] = cfg.momentum * p.vb[i] - cfg.learning_rate * g;
            p.b[i] += p.vb[i];
        }
    }
    return mean_loss;
}

std::vector<Descriptor> describe_batch(const NetworkSpec& spec, const Parameters& params,
                                       const std::vector<TdfPatch>& patches) {
    std::vector<Descriptor> out(patches.size());
    for (size_t i = 0; i < patches.size(); ++i) {
        out[i] = forward(spec, params, patch_to_tensor(patches[i]));
    }
    return out;
}

namespace {

void write_f32_block(std::ofstream& out, const std::vector<double>& values) {
    std::vector<float> f(values.size());
    for (size_t i = 0; i < values.size(); ++i) f[i] = static_cast<float>(values[i]);
    out.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * sizeof(float)));
}

void read_f32_block(std::ifstream& in, std::vector<double>& values, const std::string& path) {
    std::vector<float> f(values.size());
    if (!in.read(reinterpret_cast<char*>(f.data()),
                 static_cast<std::streamsize>(f.size() * sizeof(float)))) {
        throw std::runtime_error(path + ": unexpected end of file");
    }
    for (size_t i = 0; i < f.size(); ++i) values[i] = static_cast<double>(f[i]);
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkSpec& spec, const Parameters& params) {
    spec.validate();
    size_t conv_layers = 0;
    for (const LayerSpec& l : spec.layers) {
        if (l.kind == LayerSpec::Kind::Conv3d) ++conv_layers;
    }
    if (conv_layers != params.conv.size()) {
        throw std::runtime_error("parameters do not match spec conv layer count");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.write("3DMC", 4);
    const uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), 4);
    const std::string text = spec.serialize();
    const uint32_t len = static_cast<uint32_t>(text.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const ConvParam& p : params.conv) {
        write_f32_block(out, p.w);
        write_f32_block(out, p.b);
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::pair<NetworkSpec, Parameters> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    char magic[4];
    if (!in.read(magic, 4)) throw std::runtime_error(path + ": unexpected end of file");
    if (std::memcmp(magic, "3DMC", 4) != 0) throw std::runtime_error(path + ": bad magic");
    uint32_t version = 0;
    if (!in.read(reinterpret_cast<char*>(&version), 4)) {
        throw std::runtime_error(path + ": unexpected end of file");
    }
    if (version != 1) {
        throw std::runtime_error(path + ": unsupported version " + std::to_string(version));
    }
    uint32_t len = 0;
    if (!in.read(reinterpret_cast<char*>(&len), 4)) {
        throw std::runtime_error(path + ": unexpected end of file");
    }
    std::string text(len, '\0');
    if (!in.read(text.data(), len)) throw std::runtime_error(path + ": unexpected end of file");
    NetworkSpec spec;
    try {
        spec = NetworkSpec::parse(text);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }

    const auto all = spec.shapes();
    Parameters params;
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (l.kind != LayerSpec::Kind::Conv3d) continue;
        ConvParam p;
        p.in_channels = all[i][0];
        p.out_channels = l.out_channels;
        p.kernel = l.kernel;
        const size_t k3 = static_cast<size_t>(l.kernel) * l.kernel * l.kernel;
        p.w.resize(k3 * p.in_channels * p.out_channels);
        p.b.resize(p.out_channels);
        read_f32_block(in, p.w, path);
        read_f32_block(in, p.b, path);
        p.vw.assign(p.w.size(), 0.0);
        p.vb.assign(p.b.size(), 0.0);
        params.conv.push_back(std::move(p));
    }
    // A trailing byte means the file disagrees with its own spec block.
    char extra;
    if (in.read(&extra, 1)) throw std::runtime_error(path + ": trailing data after parameters");
    return {spec, params};
}

}  // namespace tdfmatch
