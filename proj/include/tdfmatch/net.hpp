#pragma once

#include "tdfmatch/tdf.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tdfmatch {

// Dense activation tensor, x-fastest spatial layout matching TdfPatch:
// data[x + dx*(y + dy*(z + dz*c))]. All network arithmetic is double
// precision; single precision appears only in file formats.
struct Tensor4 {
    int channels = 0, dx = 0, dy = 0, dz = 0;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(int c, int x, int y, int z)
        : channels(c), dx(x), dy(y), dz(z),
          data(static_cast<size_t>(c) * x * y * z, 0.0) {}

    size_t size() const { return data.size(); }
    size_t index(int c, int x, int y, int z) const {
        return static_cast<size_t>(x) +
               static_cast<size_t>(dx) *
                   (static_cast<size_t>(y) +
                    static_cast<size_t>(dy) * (static_cast<size_t>(z) + static_cast<size_t>(dz) * c));
    }
    double at(int c, int x, int y, int z) const { return data[index(c, x, y, z)]; }
    double& at(int c, int x, int y, int z) { return data[index(c, x, y, z)]; }
};

Tensor4 patch_to_tensor(const TdfPatch& patch);

struct LayerSpec {
    enum class Kind { Conv3d, Relu, MaxPool3d };
    Kind kind = Kind::Conv3d;
    int kernel = 0;        // conv: cubic kernel size
    int out_channels = 0;  // conv
    int window = 0;        // pool: cubic window
    int stride = 1;        // conv and pool

    static LayerSpec conv(int kernel, int out_channels, int stride = 1);
    static LayerSpec relu();
    static LayerSpec pool(int window, int stride);
};

struct NetworkSpec {
    int in_channels = 1;
    int input_dim = 30;  // cubic spatial input
    std::vector<LayerSpec> layers;
    int descriptor_dim = 512;

    // Eight 3^3 convolutions with one 2x2x2 pooling layer after the second,
    // ending in a 1^3 x 512 activation: the 512-d descriptor.
    static NetworkSpec standard(bool final_relu = true);
    // Desk-scale variant: four convolutions, one pooling layer, 64-d output.
    static NetworkSpec reduced(bool final_relu = true);

    // Per-layer output shapes (channels, dx, dy, dz), index 0 = input shape.
    // Throws on inconsistent shapes, naming the offending layer.
    std::vector<std::array<int, 4>> shapes() const;
    void validate() const;

    std::string serialize() const;
    static NetworkSpec parse(const std::string& text);
};

// Learnable state for one convolution: weights
// w[kx + K*(ky + K*(kz + K*(ic + IC*oc)))] (out-channel major, kernel
// x-fastest, matching the checkpoint block order), biases, and the SGD
// momentum buffers.
struct ConvParam {
    int in_channels = 0, out_channels = 0, kernel = 0;
    std::vector<double> w, b;
    std::vector<double> vw, vb;  // momentum

    size_t weight_index(int oc, int ic, int kx, int ky, int kz) const {
        const size_t k = static_cast<size_t>(kernel);
        return static_cast<size_t>(kx) +
               k * (static_cast<size_t>(ky) +
                    k * (static_cast<size_t>(kz) +
                         k * (static_cast<size_t>(ic) + static_cast<size_t>(in_channels) * oc)));
    }
};

struct Parameters {
    std::vector<ConvParam> conv;  // one entry per conv layer, in layer order
};

// Uniform Xavier draws on +-sqrt(6/(fan_in+fan_out)) with
// fan_in = k^3*in_channels, fan_out = k^3*out_channels; biases zero.
Parameters init_xavier(const NetworkSpec& spec, uint64_t seed);

using Descriptor = std::vector<double>;

struct ForwardCache {
    std::vector<Tensor4> acts;                       // acts[0] = input
    std::vector<std::vector<int32_t>> pool_argmax;   // per pool layer, in order
};

// Valid (no padding) cross-correlation conv, elementwise relu, window-max
// pooling; the final activation flattens to the descriptor.
Descriptor forward(const NetworkSpec& spec, const Parameters& params, const Tensor4& input,
                   ForwardCache* cache = nullptr);

// With D = ||d1-d2||: match -> 0.5*D^2; non-match -> 0.5*max(0, margin-D)^2.
// Zero subgradient at the non-smooth points (D=0 non-match, D=margin).
struct ContrastiveResult {
    double loss = 0.0;
    Descriptor grad_d1, grad_d2;
};
ContrastiveResult contrastive_loss(const Descriptor& d1, const Descriptor& d2, bool is_match,
                                   double margin);

struct ConvGrad {
    std::vector<double> w, b;
};
struct Gradients {
    std::vector<ConvGrad> conv;
    Tensor4 input;  // gradient with respect to the network input
};

Gradients backward(const NetworkSpec& spec, const Parameters& params, const ForwardCache& cache,
                   const Descriptor& grad_descriptor);

struct TrainConfig {
    double learning_rate = 1e-3;
    double momentum = 0.99;
    double weight_decay = 5e-4;
    int batch_size = 128;  // pairs per step, 1:1 match/non-match
    double contrastive_margin = 1.0;
    uint64_t seed = 0;
    int max_iterations = 0;
};

struct TrainingPair {
    const TdfPatch* a = nullptr;
    const TdfPatch* b = nullptr;
    bool is_match = false;
};

// One Siamese SGD step over the batch: both patches of every pair go through
// the shared parameters, gradients from both streams accumulate, then
// v <- momentum*v - lr*(g + weight_decay*w), w <- w + v. Returns the mean
// pair loss. Throws "divergence" (no update applied) on a non-finite loss.
double train_step(const NetworkSpec& spec, Parameters& params,
                  const std::vector<TrainingPair>& batch, const TrainConfig& cfg);

std::vector<Descriptor> describe_batch(const NetworkSpec& spec, const Parameters& params,
                                       const std::vector<TdfPatch>& patches);

// Checkpoint: magic "3DMC", uint32 version=1, length-prefixed NetworkSpec
// text, then per conv layer a float32 weight block and a float32 bias block.
void save_checkpoint(const std::string& path, const NetworkSpec& spec, const Parameters& params);
std::pair<NetworkSpec, Parameters> load_checkpoint(const std::string& path);

}  // namespace tdfmatch
