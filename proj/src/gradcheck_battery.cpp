#include <chrono>
#include <random>

#include "sgscn/gradcheck.hpp"
#include "sgscn/losses.hpp"
#include "sgscn/ops.hpp"
#include "sgscn/segnet.hpp"
#include "sgscn/trainer.hpp"

namespace sgscn {

bool BatteryReport::passed(double tolerance) const {
  for (const auto& c : cases) {
    if (!(c.max_rel_error < tolerance) || c.checked == 0) return false;
  }
  return true;
}

namespace {

using Rng = std::mt19937_64;
using Fn = std::function<Var<double>(const Var<double>&)>;

Tensor<double> normal(Shape shape, Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = d(rng);
  return t;
}

Tensor<double> uniform(Shape shape, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = d(rng);
  return t;
}

LabelMap random_labels(std::size_t rows, std::size_t cols, int classes, Rng& rng) {
  std::uniform_int_distribution<int> d(0, classes - 1);
  LabelMap m(rows, cols);
  for (auto& v : m.values) v = d(rng);
  return m;
}

// Signs of all 4-neighbour differences; the |.| kinks of the spatial loss.
void append_diff_signs(const Tensor<double>& m, std::vector<std::uint8_t>& out) {
  const std::size_t C = m.dim(0), H = m.dim(1), W = m.dim(2);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < H; ++r) {
      for (std::size_t k = 0; k < W; ++k) {
        if (r + 1 < H) out.push_back(m.at(c, r + 1, k) > m.at(c, r, k));
        if (k + 1 < W) out.push_back(m.at(c, r, k + 1) > m.at(c, r, k));
      }
    }
  }
}

struct Accumulator {
  BatteryCase c;
  void add(const GradCheckResult<double>& r, std::uint64_t seed) {
    if (r.checked > 0 && (c.checked == 0 || r.max_rel_error > c.max_rel_error)) {
      c.max_rel_error = r.max_rel_error;
      c.worst_seed = seed;
    }
    c.checked += r.checked;
    c.refined += r.refined;
    c.skipped += r.skipped;
  }
};

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(n, count));
  return all;
}

}  // namespace

BatteryReport run_gradcheck_battery(int seeds, double h, std::uint64_t base_seed) {
  const auto t0 = std::chrono::steady_clock::now();
  Accumulator conv{{"conv2d"}}, norm{{"channel_norm"}}, soft{{"softmax_channels"}},
      ce{{"cross_entropy_loss"}}, ss{{"sparse_spatial_loss"}}, cc{{"context_consistency_loss"}},
      net{{"total_loss(3-layer net, 1x8x8)"}};
  const double floor = 1e-6;
  const double refine_h = h * 1e-2;

  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
    Rng rng(seed * 0x9E3779B97F4A7C15ull + 1);

    {
      const auto x = normal({2, 5, 5}, rng), w = normal({3, 2, 3, 3}, rng),
                 b = normal({3}, rng), proj = normal({3, 5, 5}, rng);
      auto leaf = [](const Tensor<double>& t) { return Var<double>::leaf(t); };
      conv.add(grad_check<double>(
                   [&](const Var<double>& v) { return dot(conv2d(v, leaf(w), leaf(b)), proj); }, x,
                   h, floor),
               seed);
      conv.add(grad_check<double>(
                   [&](const Var<double>& v) { return dot(conv2d(leaf(x), v, leaf(b)), proj); }, w,
                   h, floor),
               seed);
      conv.add(grad_check<double>(
                   [&](const Var<double>& v) { return dot(conv2d(leaf(x), leaf(w), v), proj); }, b,
                   h, floor),
               seed);
    }
    {
      const auto x = normal({3, 4, 5}, rng), proj = normal({3, 4, 5}, rng);
      norm.add(grad_check<double>(
                   [&](const Var<double>& v) { return dot(channel_norm(v, 1e-5), proj); }, x, h,
                   floor),
               seed);
    }
    {
      const auto x = normal({4, 3, 3}, rng), proj = normal({4, 3, 3}, rng);
      soft.add(grad_check<double>(
                   [&](const Var<double>& v) { return dot(softmax_channels(v), proj); }, x, h,
                   floor),
               seed);
    }
    {
      const auto p = uniform({4, 3, 3}, 0.05, 1.0, rng);
      const auto labels = random_labels(3, 3, 4, rng);
      ce.add(grad_check<double>(
                 [&](const Var<double>& v) { return cross_entropy_loss(v, labels); }, p, h, floor),
             seed);
    }
    {
      const auto m = normal({3, 4, 4}, rng);
      const KinkPattern<double> signs = [](const Tensor<double>& t) {
        std::vector<std::uint8_t> out;
        append_diff_signs(t, out);
        return out;
      };
      for (bool strict : {false, true}) {
        LossOptions o;
        o.strict_index_bounds = strict;
        ss.add(grad_check<double>(
                   [&](const Var<double>& v) { return sparse_spatial_loss(v, o); }, m, h, floor,
                   {}, signs, refine_h),
               seed);
      }
    }
    {
      const auto p = uniform({3, 5, 5}, 0.05, 1.0, rng);
      cc.add(grad_check<double>(
                 [&](const Var<double>& v) { return context_consistency_loss(v); }, p, h, floor),
             seed);
    }
    {
      SegNetConfig cfg;
      cfg.input_channels = 1;
      const auto image = uniform({1, 8, 8}, 0.0, 1.0, rng);
      ParamSet<double> params = init_params<double>(cfg, seed);
      const LabelMap labels = assign_labels(forward(params, cfg, image).value());
      const LossWeights weights{1, 1, 1};

      // Pre-activation signs of every ReLU plus the spatial-loss signs.
      auto pattern_for = [&](const ParamSet<double>& ps, const Tensor<double>& img) {
        std::vector<std::uint8_t> out;
        Var<double> x = Var<double>::leaf(img);
        for (int layer = 0; layer < cfg.num_layers; ++layer) {
          x = conv2d(x, ps[2 * layer].var, ps[2 * layer + 1].var);
          for (double v : x.value().data()) out.push_back(v > 0);
          x = channel_norm(relu(x), static_cast<double>(cfg.eps_norm));
        }
        append_diff_signs(softmax_channels(x).value(), out);
        return out;
      };
      auto loss_at = [&](const ParamSet<double>& ps, const Var<double>& img) {
        return total_loss(forward(ps, cfg, img), labels, weights).total;
      };

      net.add(grad_check<double>([&](const Var<double>& v) { return loss_at(params, v); }, image,
                                 h, floor, {},
                                 [&](const Tensor<double>& img) { return pattern_for(params, img); },
                                 refine_h),
              seed);

      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const Tensor<double> base = params[pi].var.value();
        auto with = [&](const Var<double>& v) {
          ParamSet<double> ps = params;
          ps.entries[pi].var = v;
          return ps;
        };
        const auto idx = sample_indices(base.numel(), 8, rng);
        net.add(grad_check<double>(
                    [&](const Var<double>& v) { return loss_at(with(v), Var<double>::leaf(image)); },
                    base, h, floor, idx,
                    [&](const Tensor<double>& t) {
                      return pattern_for(with(Var<double>::leaf(t)), image);
                    },
                    refine_h),
                seed);
      }
    }
  }

  BatteryReport report;
  for (auto* a : {&conv, &norm, &soft, &ce, &ss, &cc, &net}) report.cases.push_back(a->c);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace sgscn
