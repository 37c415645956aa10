#include "sgscn/segnet.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <random>

#include "sgscn/ops.hpp"

namespace sgscn {

void SegNetConfig::validate() const {
  if (num_layers < 1) throw Error("segnet: num_layers must be >= 1");
  if (filters < 2) throw Error("segnet: filters must be >= 2");
  if (input_channels < 1) throw Error("segnet: input_channels must be >= 1");
  if (!(eps_norm >= 0.0)) throw Error("segnet: eps_norm must be >= 0");
}

template <typename T>
ParamSet<T> init_params(const SegNetConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  ParamSet<T> params;
  std::size_t in_ch = static_cast<std::size_t>(config.input_channels);
  const std::size_t out_ch = static_cast<std::size_t>(config.filters);
  for (int layer = 0; layer < config.num_layers; ++layer) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in_ch * 9));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor<T> w({out_ch, in_ch, 3, 3});
    for (auto& v : w.data()) v = static_cast<T>(dist(rng));
    const auto tag = std::to_string(layer);
    params.entries.push_back({"conv" + tag + ".weight", Var<T>::leaf(std::move(w), true), {}});
    params.entries.push_back(
        {"conv" + tag + ".bias", Var<T>::leaf(Tensor<T>({out_ch}), true), {}});
    in_ch = out_ch;
  }
  for (auto& p : params.entries) p.velocity = Tensor<T>(p.var.shape());
  return params;
}

template <typename T>
Var<T> forward(const ParamSet<T>& params, const SegNetConfig& config, const Var<T>& image) {
  const auto& x = image.value();
  require_rank3(x, "segnet forward");
  if (x.dim(1) < 3 || x.dim(2) < 3) {
    throw ShapeError("segnet forward: image is " + std::to_string(x.dim(1)) + "x" +
                     std::to_string(x.dim(2)) + ", smaller than the 3x3 kernel");
  }
  if (params.size() != static_cast<std::size_t>(2 * config.num_layers)) {
    throw ShapeError("segnet forward: parameter set has " + std::to_string(params.size()) +
                     " tensors, config needs " + std::to_string(2 * config.num_layers));
  }
  const T eps = static_cast<T>(config.eps_norm);
  Var<T> h = image;
  for (int layer = 0; layer < config.num_layers; ++layer) {
    h = conv2d(h, params[2 * layer].var, params[2 * layer + 1].var);
    h = relu(h);
    h = channel_norm(h, eps);
  }
  return h;
}

template <typename T>
Var<T> forward(const ParamSet<T>& params, const SegNetConfig& config, const Tensor<T>& image) {
  return forward(params, config, Var<T>::leaf(image));
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw Error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }
float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamSet<float>& params) {
  if (params.size() % 2 != 0) throw Error("checkpoint: parameter set is not weight/bias pairs");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("checkpoint: cannot open " + path.string() + " for writing");
  os.write("SGSN", 4);
  put_u32(os, kCheckpointVersion);
  const std::size_t layers = params.size() / 2;
  put_u32(os, static_cast<std::uint32_t>(layers));
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& s = params[2 * l].var.shape();
    if (s.size() != 4) throw ShapeError("checkpoint: layer weight must be rank 4");
    for (auto e : s) put_u32(os, static_cast<std::uint32_t>(e));
  }
  for (std::size_t l = 0; l < layers; ++l) {
    for (float v : params[2 * l].var.value().data()) put_f32(os, v);
    for (float v : params[2 * l + 1].var.value().data()) put_f32(os, v);
  }
  if (!os) throw Error("checkpoint: write failed for " + path.string());
}

ParamSet<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("checkpoint: cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "SGSN") {
    throw Error("checkpoint: " + path.string() + " is not an SGSN file");
  }
  const auto version = get_u32(is);
  if (version != kCheckpointVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto layers = get_u32(is);
  std::vector<Shape> shapes(layers);
  for (auto& s : shapes) {
    for (int i = 0; i < 4; ++i) s.push_back(get_u32(is));
    if (s[2] != 3 || s[3] != 3) throw ShapeError("checkpoint: kernel must be 3x3");
  }
  ParamSet<float> params;
  for (std::uint32_t l = 0; l < layers; ++l) {
    Tensor<float> w(shapes[l]);
    for (auto& v : w.data()) v = get_f32(is);
    Tensor<float> b({shapes[l][0]});
    for (auto& v : b.data()) v = get_f32(is);
    const auto tag = std::to_string(l);
    params.entries.push_back({"conv" + tag + ".weight", Var<float>::leaf(std::move(w), true),
                              Tensor<float>(shapes[l])});
    params.entries.push_back({"conv" + tag + ".bias", Var<float>::leaf(std::move(b), true),
                              Tensor<float>({shapes[l][0]})});
  }
  return params;
}

template ParamSet<float> init_params<float>(const SegNetConfig&, std::uint64_t);
template ParamSet<double> init_params<double>(const SegNetConfig&, std::uint64_t);
template Var<float> forward<float>(const ParamSet<float>&, const SegNetConfig&,
                                   const Tensor<float>&);
template Var<double> forward<double>(const ParamSet<double>&, const SegNetConfig&,
                                     const Tensor<double>&);
template Var<float> forward<float>(const ParamSet<float>&, const SegNetConfig&, const Var<float>&);
template Var<double> forward<double>(const ParamSet<double>&, const SegNetConfig&,
                                     const Var<double>&);

}  // namespace sgscn
