#include "sortnet/softsort.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "sortnet/objective.hpp"

namespace sortnet {

Mat LayerMatrix::to_dense() const {
  Mat m = Mat::identity(n);
  for (const auto& b : blocks) {
    m(b.i, b.i) = b.diag;
    m(b.j, b.j) = b.diag;
    m(b.i, b.j) = b.off;
    m(b.j, b.i) = b.off;
  }
  return m;
}

std::vector<double> LayerMatrix::apply(std::span<const double> v) const {
  if (v.size() != n) throw std::invalid_argument("LayerMatrix::apply: size mismatch");
  std::vector<double> out(v.begin(), v.end());
  for (const auto& b : blocks) {
    out[b.i] = b.diag * v[b.i] + b.off * v[b.j];
    out[b.j] = b.off * v[b.i] + b.diag * v[b.j];
  }
  return out;
}

void LayerMatrix::left_apply(Mat& m) const {
  if (m.rows() != n) throw std::invalid_argument("LayerMatrix::left_apply: size mismatch");
  const std::size_t cols = m.cols();
  std::vector<double> tmp(cols);
  for (const auto& b : blocks) {
    auto ri = m.row(b.i);
    auto rj = m.row(b.j);
    for (std::size_t c = 0; c < cols; ++c) {
      tmp[c] = b.diag * ri[c] + b.off * rj[c];
      rj[c] = b.off * ri[c] + b.diag * rj[c];
    }
    std::copy(tmp.begin(), tmp.end(), ri.begin());
  }
}

std::pair<std::vector<double>, LayerMatrix> apply_layer(std::span<const double> values,
                                                        const Layer& layer,
                                                        const RelaxConfig& cfg) {
  LayerMatrix mat;
  mat.n = values.size();
  std::vector<double> out(values.begin(), values.end());
  for (const auto& c : layer) {
    if (c.min_pos >= values.size() || c.max_pos >= values.size()) {
      throw std::invalid_argument("apply_layer: comparator lane out of range");
    }
    const SwapDetail d = soft_swap_detail(values[c.min_pos], values[c.max_pos], cfg);
    out[c.min_pos] = d.min_out;
    out[c.max_pos] = d.max_out;
    mat.blocks.push_back({c.min_pos, c.max_pos, d.weight_first, d.weight_second});
  }
  return {std::move(out), std::move(mat)};
}

ForwardResult forward(std::span<const double> values, const ComparatorSchedule& schedule,
                      const RelaxConfig& cfg) {
  if (values.size() != schedule.n) throw std::invalid_argument("forward: size mismatch");
  cfg.validate();

  ForwardResult r;
  r.trace.lanes = schedule.n;
  r.trace.cfg = cfg;
  r.trace.layer_inputs.reserve(schedule.layer_count());
  r.trace.layer_matrices.reserve(schedule.layer_count());
  r.permutation = Mat::identity(schedule.n);
  r.sorted.assign(values.begin(), values.end());

  for (const auto& layer : schedule.layers) {
    r.trace.layer_inputs.push_back(r.sorted);
    auto [next, mat] = apply_layer(r.sorted, layer, cfg);
    mat.left_apply(r.permutation);
    r.sorted = std::move(next);
    r.trace.layer_matrices.push_back(std::move(mat));
  }
  return r;
}

std::vector<ForwardResult> forward_batch(const std::vector<std::vector<double>>& batch,
                                         const ComparatorSchedule& schedule,
                                         const RelaxConfig& cfg) {
  std::vector<ForwardResult> out;
  out.reserve(batch.size());
  for (const auto& values : batch) out.push_back(forward(values, schedule, cfg));
  return out;
}

std::vector<std::vector<double>> backward_batch(const std::vector<ForwardResult>& batch,
                                                const std::vector<Mat>& grad_permutations) {
  if (batch.size() != grad_permutations.size()) {
    throw std::invalid_argument("backward_batch: size mismatch");
  }
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    out.push_back(backward(batch[b].trace, nullptr, &grad_permutations[b]));
  }
  return out;
}

namespace {

// Prefix products R_l = P_l * ... * P_1 of the layer matrices, served in
// reverse order during the backward pass. Storing all L dense products would
// cost O(L n^2) memory, so only every block_size-th product is kept and the
// active block is recomputed forward on demand.
class PrefixProducts {
 public:
  PrefixProducts(const ForwardTrace& trace, std::size_t n) : trace_(trace) {
    const std::size_t layers = trace.layer_count();
    max_index_ = layers == 0 ? 0 : layers - 1;
    block_size_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(layers)))));
    Mat r = Mat::identity(n);
    checkpoints_.push_back(r);
    // checkpoint q holds R_{q * block_size}; the largest index served is layers-1
    for (std::size_t idx = 1; idx <= max_index_; ++idx) {
      trace_.layer_matrices[idx - 1].left_apply(r);
      if (idx % block_size_ == 0) checkpoints_.push_back(r);
    }
  }

  // Returns R_idx, the product of the first idx layer matrices.
  const Mat& get(std::size_t idx) {
    const std::size_t q = idx / block_size_;
    if (q != cached_block_) {
      const std::size_t base = q * block_size_;
      block_.clear();
      Mat r = checkpoints_[q];
      block_.push_back(r);
      const std::size_t last = std::min(base + block_size_ - 1, max_index_);
      for (std::size_t i = base + 1; i <= last; ++i) {
        trace_.layer_matrices[i - 1].left_apply(r);
        block_.push_back(r);
      }
      cached_block_ = q;
    }
    return block_[idx - q * block_size_];
  }

 private:
  const ForwardTrace& trace_;
  std::size_t max_index_ = 0;
  std::size_t block_size_ = 1;
  std::vector<Mat> checkpoints_;
  std::vector<Mat> block_;
  std::size_t cached_block_ = static_cast<std::size_t>(-1);
};

}  // namespace

std::vector<double> backward(const ForwardTrace& trace,
                             const std::vector<double>* grad_sorted,
                             const Mat* grad_permutation) {
  const std::size_t n = trace.n();
  if (n == 0) throw std::invalid_argument("backward: empty trace");
  if (grad_sorted == nullptr && grad_permutation == nullptr) {
    throw std::invalid_argument("backward: need at least one upstream gradient");
  }
  if (grad_sorted != nullptr && grad_sorted->size() != n) {
    throw std::invalid_argument("backward: grad_sorted size mismatch");
  }
  if (grad_permutation != nullptr &&
      (grad_permutation->rows() != n || grad_permutation->cols() != n)) {
    throw std::invalid_argument("backward: grad_permutation shape mismatch");
  }
  if (trace.layer_inputs.size() != trace.layer_matrices.size()) {
    throw std::invalid_argument("backward: trace inconsistency");
  }

  const RelaxConfig& cfg = trace.cfg;
  const std::size_t layers = trace.layer_count();

  std::vector<double> adj(n, 0.0);
  if (grad_sorted != nullptr) adj = *grad_sorted;

  const bool has_p = grad_permutation != nullptr;
  Mat w;  // suffix-transposed upstream: W_l = (P_L ... P_{l+1})^T * G
  std::optional<PrefixProducts> prefixes;
  if (has_p && layers > 0) {
    w = *grad_permutation;
    prefixes.emplace(trace, n);
  }

  for (std::size_t l = layers; l-- > 0;) {
    const auto& inputs = trace.layer_inputs[l];
    const auto& mat = trace.layer_matrices[l];
    const Mat* r_prev = (has_p && layers > 0) ? &prefixes->get(l) : nullptr;

    for (const auto& b : mat.blocks) {
      const double a_i = inputs[b.i];
      const double a_j = inputs[b.j];
      const double x = a_j - a_i;
      const double g_min = adj[b.i];
      const double g_max = adj[b.j];

      // d alpha_lane / d x; zero in hard mode where alpha is a step.
      const double dalpha_dx = mix_slope(x, cfg);

      double dloss_dalpha = -x * (g_min - g_max);
      if (r_prev != nullptr) {
        auto wi = w.row(b.i);
        auto wj = w.row(b.j);
        auto ri = r_prev->row(b.i);
        auto rj = r_prev->row(b.j);
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += (wi[c] - wj[c]) * (ri[c] - rj[c]);
        dloss_dalpha += acc;
      }

      const double corr = dalpha_dx * dloss_dalpha;
      adj[b.i] = b.diag * g_min + b.off * g_max - corr;
      adj[b.j] = b.off * g_min + b.diag * g_max + corr;
    }

    if (has_p && l > 0) mat.left_apply(w);  // W_{l-1} = P_l * W_l (P_l symmetric)
  }
  return adj;
}

std::vector<std::size_t> hard_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::size_t> ranks(values.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r;
  return ranks;
}

double gradient_check(const ComparatorSchedule& schedule, const RelaxConfig& cfg,
                      std::span<const double> values, double h) {
  if (values.size() != schedule.n) throw std::invalid_argument("gradient_check: size mismatch");
  if (!(h > 0.0)) throw std::invalid_argument("gradient_check: step must be > 0");
  for (std::size_t a = 0; a < values.size(); ++a) {
    for (std::size_t b = a + 1; b < values.size(); ++b) {
      if (std::abs(values[a] - values[b]) < 10.0 * h) {
        throw std::invalid_argument("gradient_check: pairwise gap below 10*h");
      }
    }
  }

  // Fixed target permutation, seeded per n so the objective is deterministic.
  std::mt19937_64 rng(0x5eed5eedULL + schedule.n);
  std::vector<std::size_t> ranks(schedule.n);
  std::iota(ranks.begin(), ranks.end(), std::size_t{0});
  std::shuffle(ranks.begin(), ranks.end(), rng);
  const GroundTruthPermutation q(ranks);

  // Per-entry clamp state of the loss; the objective is only C^1 where this
  // pattern is constant, so central differences are compared only on
  // coordinates whose stencil keeps the pattern fixed.
  const auto clamp_pattern = [&](const Mat& p) {
    std::vector<unsigned char> pattern(p.data().size());
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      const double v = p.data()[i];
      pattern[i] = v < 1e-12 ? 0 : (v > 1.0 - 1e-12 ? 2 : 1);
    }
    return pattern;
  };
  const auto evaluate = [&](std::span<const double> v) {
    const Mat p = forward(v, schedule, cfg).permutation;
    return std::pair{ranking_ce_loss(p, q).loss, clamp_pattern(p)};
  };

  ForwardResult fw = forward(values, schedule, cfg);
  const LossResult lr = ranking_ce_loss(fw.permutation, q);
  const std::vector<double> analytic = backward(fw.trace, nullptr, &lr.grad);
  const auto base_pattern = clamp_pattern(fw.permutation);

  double max_rel = 0.0;
  std::size_t compared = 0;
  std::vector<double> probe(values.begin(), values.end());
  for (std::size_t c = 0; c < probe.size(); ++c) {
    const double orig = probe[c];
    probe[c] = orig + h;
    const auto [up, up_pattern] = evaluate(probe);
    probe[c] = orig - h;
    const auto [down, down_pattern] = evaluate(probe);
    probe[c] = orig;
    if (up_pattern != base_pattern || down_pattern != base_pattern) continue;
    ++compared;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[c]), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, std::abs(analytic[c] - numeric) / denom);
  }
  if (compared == 0) {
    throw std::runtime_error("gradient_check: no coordinate is differentiable across the step");
  }
  return max_rel;
}

}  // namespace sortnet
