#pragma once

#include <array>
#include <utility>
#include <vector>

#include "spmamba/params.hpp"
#include "spmamba/scan_order.hpp"
#include "spmamba/tensor.hpp"

namespace spm {

// Zero-order-hold style discretization. A (D,N) holds negative continuous
// decays, B (L,N) and delta (L,D) are per-timestep. Produces
//   Abar[l,d,n] = exp(delta[l,d] * A[d,n])   in (0,1] for delta>0, A<0
//   Bbar[l,d,n] = delta[l,d] * B[l,n]        (first-order approximation)
template <typename T>
std::pair<Tensor<T>, Tensor<T>> discretize(const Tensor<T>& A, const Tensor<T>& B,
                                           const Tensor<T>& delta) {
  require(A.ndim() == 2 && B.ndim() == 2 && delta.ndim() == 2, "discretize",
          "expects A(D,N), B(L,N), delta(L,D)");
  const int64_t D = A.dim(0), N = A.dim(1), L = delta.dim(0);
  require(delta.dim(1) == D, "discretize",
          "delta channels " + std::to_string(delta.dim(1)) + " vs A channels " + std::to_string(D));
  require(B.dim(0) == L && B.dim(1) == N, "discretize",
          "B shape " + shape_str(B.shape()) + " vs expected (" + std::to_string(L) + "," +
              std::to_string(N) + ")");
  if (!A.finite() || !B.finite() || !delta.finite())
    throw ValueError("discretize: non-finite inputs");

  Tensor<T> abar = Tensor<T>::zeros({L, D, N});
  Tensor<T> bbar = Tensor<T>::zeros({L, D, N});
  for (int64_t l = 0; l < L; ++l)
    for (int64_t d = 0; d < D; ++d) {
      const T dt = delta.data()[l * D + d];
      for (int64_t n = 0; n < N; ++n) {
        abar.data()[(l * D + d) * N + n] = std::exp(dt * A.data()[d * N + n]);
        bbar.data()[(l * D + d) * N + n] = dt * B.data()[l * N + n];
      }
    }
  if (detail::tracing<T>({&A, &B, &delta})) {
    detail::mark_output(abar);
    detail::mark_output(bbar);
    Tape<T>::active()->record([an = A.node(), bn = B.node(), dn = delta.node(),
                               abn = abar.node(), bbn = bbar.node(), L, D, N] {
      for (int64_t l = 0; l < L; ++l)
        for (int64_t d = 0; d < D; ++d) {
          const T dt = dn->value[l * D + d];
          T gdt = T(0);
          for (int64_t n = 0; n < N; ++n) {
            const int64_t i = (l * D + d) * N + n;
            const T a = an->value[d * N + n];
            const T ga = abn->grad[i] * abn->value[i];  // d exp(dt*a) = exp(..) * d(dt*a)
            const T gb = bbn->grad[i];
            if (an->requires_grad) an->grad[d * N + n] += ga * dt;
            if (bn->requires_grad) bn->grad[l * N + n] += gb * dt;
            gdt += ga * a + gb * bn->value[l * N + n];
          }
          if (dn->requires_grad) dn->grad[l * D + d] += gdt;
        }
    });
  }
  return {abar, bbar};
}

namespace detail {

template <typename T>
void check_scan_shapes(const Tensor<T>& abar, const Tensor<T>& bbar, const Tensor<T>& c,
                       const Tensor<T>& x, const Tensor<T>& d_skip, const char* op) {
  require(abar.ndim() == 3 && bbar.shape() == abar.shape(), op,
          "Abar/Bbar must be matching (L,D,N), got " + shape_str(abar.shape()) + " vs " +
              shape_str(bbar.shape()));
  const int64_t L = abar.dim(0), D = abar.dim(1), N = abar.dim(2);
  require(c.ndim() == 2 && c.dim(0) == L && c.dim(1) == N, op,
          "C shape " + shape_str(c.shape()) + " does not match L=" + std::to_string(L) +
              " N=" + std::to_string(N));
  require(x.ndim() == 2 && x.dim(0) == L && x.dim(1) == D, op,
          "x shape " + shape_str(x.shape()) + " does not match L=" + std::to_string(L) +
              " D=" + std::to_string(D));
  require(d_skip.ndim() == 1 && d_skip.dim(0) == D, op,
          "skip coefficients must be (D), got " + shape_str(d_skip.shape()));
}

// Reference recurrence, streaming over timesteps:
//   h[l] = Abar[l] * h[l-1] + Bbar[l] * x[l],  h[-1] = 0.
template <typename T>
std::vector<T> scan_states_sequential(const Tensor<T>& abar, const Tensor<T>& bbar,
                                      const Tensor<T>& x) {
  const int64_t L = abar.dim(0), D = abar.dim(1), N = abar.dim(2);
  std::vector<T> h(static_cast<size_t>(L * D * N));
  for (int64_t l = 0; l < L; ++l)
    for (int64_t d = 0; d < D; ++d) {
      const T xv = x.data()[l * D + d];
      const int64_t base = (l * D + d) * N;
      const int64_t prev = ((l - 1) * D + d) * N;
      for (int64_t n = 0; n < N; ++n) {
        const T hp = l > 0 ? h[static_cast<size_t>(prev + n)] : T(0);
        h[static_cast<size_t>(base + n)] =
            abar.data()[base + n] * hp + bbar.data()[base + n] * xv;
      }
    }
  return h;
}

// Work-efficient (Blelloch) inclusive scan over the associative operator
//   (a1,b1) o (a2,b2) = (a1*a2, a2*b1 + b2)
// applied per (channel,state) lane. O(L) work, O(log L) span.
template <typename T>
std::vector<T> scan_states_parallel(const Tensor<T>& abar, const Tensor<T>& bbar,
                                    const Tensor<T>& x) {
  const int64_t L = abar.dim(0), D = abar.dim(1), N = abar.dim(2);
  std::vector<T> h(static_cast<size_t>(L * D * N));
  int64_t lp = 1;
  while (lp < L) lp <<= 1;
  std::vector<T> pa(static_cast<size_t>(lp)), pb(static_cast<size_t>(lp));
  std::vector<T> oa(static_cast<size_t>(L)), ob(static_cast<size_t>(L));
  for (int64_t d = 0; d < D; ++d)
    for (int64_t n = 0; n < N; ++n) {
      for (int64_t l = 0; l < L; ++l) {
        const int64_t i = (l * D + d) * N + n;
        oa[static_cast<size_t>(l)] = abar.data()[i];
        ob[static_cast<size_t>(l)] = bbar.data()[i] * x.data()[l * D + d];
        pa[static_cast<size_t>(l)] = oa[static_cast<size_t>(l)];
        pb[static_cast<size_t>(l)] = ob[static_cast<size_t>(l)];
      }
      for (int64_t l = L; l < lp; ++l) {
        pa[static_cast<size_t>(l)] = T(1);
        pb[static_cast<size_t>(l)] = T(0);
      }
      // up-sweep
      for (int64_t s = 1; s < lp; s <<= 1)
        for (int64_t i = 2 * s - 1; i < lp; i += 2 * s) {
          const size_t hi = static_cast<size_t>(i), lo = static_cast<size_t>(i - s);
          pb[hi] = pa[hi] * pb[lo] + pb[hi];
          pa[hi] = pa[lo] * pa[hi];
        }
      // down-sweep to exclusive prefixes
      pa[static_cast<size_t>(lp - 1)] = T(1);
      pb[static_cast<size_t>(lp - 1)] = T(0);
      for (int64_t s = lp / 2; s >= 1; s >>= 1)
        for (int64_t i = 2 * s - 1; i < lp; i += 2 * s) {
          const size_t hi = static_cast<size_t>(i), lo = static_cast<size_t>(i - s);
          const T ta = pa[lo], tb = pb[lo];
          pa[lo] = pa[hi];
          pb[lo] = pb[hi];
          pb[hi] = ta * pb[hi] + tb;
          pa[hi] = ta * pa[hi];
        }
      // inclusive[i] = exclusive[i] o original[i]; state starts at zero so the
      // accumulated b-component is h itself.
      for (int64_t l = 0; l < L; ++l) {
        const size_t li = static_cast<size_t>(l);
        h[static_cast<size_t>((l * D + d) * N + n)] = oa[li] * pb[li] + ob[li];
      }
    }
  return h;
}

template <typename T>
Tensor<T> scan_readout(const std::vector<T>& h, const Tensor<T>& c, const Tensor<T>& x,
                       const Tensor<T>& d_skip) {
  const int64_t L = x.dim(0), D = x.dim(1), N = c.dim(1);
  Tensor<T> y = Tensor<T>::zeros({L, D});
  for (int64_t l = 0; l < L; ++l)
    for (int64_t d = 0; d < D; ++d) {
      T acc = d_skip.data()[d] * x.data()[l * D + d];
      const int64_t base = (l * D + d) * N;
      for (int64_t n = 0; n < N; ++n) acc += c.data()[l * N + n] * h[static_cast<size_t>(base + n)];
      y.data()[l * D + d] = acc;
    }
  return y;
}

// Adjoint of the recurrence, shared by both scan variants. dh runs backward
// in time with two rolling planes.
template <typename T>
void record_scan_backward(const Tensor<T>& abar, const Tensor<T>& bbar, const Tensor<T>& c,
                          const Tensor<T>& x, const Tensor<T>& d_skip, Tensor<T>& y,
                          std::vector<T> h) {
  detail::mark_output(y);
  Tape<T>::active()->record([abn = abar.node(), bbn = bbar.node(), cn = c.node(), xn = x.node(),
                             dn = d_skip.node(), yn = y.node(), h = std::move(h)] {
    const int64_t L = xn->shape[0], D = xn->shape[1], N = cn->shape[1];
    std::vector<T> dh_next(static_cast<size_t>(D * N), T(0));
    std::vector<T> dh_cur(static_cast<size_t>(D * N));
    for (int64_t l = L - 1; l >= 0; --l) {
      for (int64_t d = 0; d < D; ++d) {
        const T gy = yn->grad[l * D + d];
        const T xv = xn->value[l * D + d];
        T gx_acc = T(0);
        const int64_t base = (l * D + d) * N;
        const int64_t next = ((l + 1) * D + d) * N;
        const int64_t prev = ((l - 1) * D + d) * N;
        for (int64_t n = 0; n < N; ++n) {
          T dh = cn->value[l * N + n] * gy;
          if (l + 1 < L)
            dh += abn->value[next + n] * dh_next[static_cast<size_t>(d * N + n)];
          dh_cur[static_cast<size_t>(d * N + n)] = dh;
          if (abn->requires_grad && l > 0)
            abn->grad[base + n] += dh * h[static_cast<size_t>(prev + n)];
          if (bbn->requires_grad) bbn->grad[base + n] += dh * xv;
          if (cn->requires_grad) cn->grad[l * N + n] += gy * h[static_cast<size_t>(base + n)];
          gx_acc += bbn->value[base + n] * dh;
        }
        if (xn->requires_grad) xn->grad[l * D + d] += gx_acc + dn->value[d] * gy;
        if (dn->requires_grad) dn->grad[d] += gy * xv;
      }
      std::swap(dh_cur, dh_next);
    }
  });
}

}  // namespace detail

// Reference scan: exact recurrence semantics, also the oracle for the
// parallel variant.
template <typename T>
Tensor<T> selective_scan_sequential(const Tensor<T>& abar, const Tensor<T>& bbar,
                                    const Tensor<T>& c, const Tensor<T>& x,
                                    const Tensor<T>& d_skip) {
  detail::check_scan_shapes(abar, bbar, c, x, d_skip, "selective-scan-sequential");
  std::vector<T> h = detail::scan_states_sequential(abar, bbar, x);
  Tensor<T> y = detail::scan_readout(h, c, x, d_skip);
  if (detail::tracing<T>({&abar, &bbar, &c, &x, &d_skip}))
    detail::record_scan_backward(abar, bbar, c, x, d_skip, y, std::move(h));
  return y;
}

template <typename T>
Tensor<T> selective_scan_parallel(const Tensor<T>& abar, const Tensor<T>& bbar,
                                  const Tensor<T>& c, const Tensor<T>& x,
                                  const Tensor<T>& d_skip) {
  detail::check_scan_shapes(abar, bbar, c, x, d_skip, "selective-scan-parallel");
  std::vector<T> h = detail::scan_states_parallel(abar, bbar, x);
  Tensor<T> y = detail::scan_readout(h, c, x, d_skip);
  if (detail::tracing<T>({&abar, &bbar, &c, &x, &d_skip}))
    detail::record_scan_backward(abar, bbar, c, x, d_skip, y, std::move(h));
  return y;
}

// ---------------------------------------------------------------------------
// SPSS block
// ---------------------------------------------------------------------------

struct SpssBlockConfig {
  int channels = 0;
  int expansion = 2;
  int state_dim = 16;
  int conv_kernel = 4;
  std::vector<int> directions = {0, 1, 2, 3, 4, 5, 6, 7};
};

template <typename T>
Tensor<T> grid_to_seq(const Tensor<T>& grid) {
  const int64_t C = grid.dim(0), H = grid.dim(1), W = grid.dim(2);
  return transpose2d(reshape(grid, {C, H * W}));
}

template <typename T>
Tensor<T> seq_to_grid(const Tensor<T>& seq, int64_t C, int64_t H, int64_t W) {
  return reshape(transpose2d(seq), {C, H, W});
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  return add(matmul(x, w), broadcast_rows(b, x.dim(0)));
}

// Two-branch block over a square feature grid: a state-space branch that
// scans the patch sequence along the configured circular-Hilbert directions,
// and a local 2-layer convolution branch; residual sum, then layer norm over
// channels.
template <typename T>
class SpssBlock {
 public:
  SpssBlock(const SpssBlockConfig& cfg, const std::string& prefix, ParamStore<T>& store, Rng& rng)
      : cfg_(cfg) {
    require(!cfg.directions.empty(), "spss-block", "direction set must be non-empty");
    const int c = cfg.channels;
    const int inner = c * cfg.expansion;
    dt_rank_ = inner / 16 > 0 ? inner / 16 : 1;
    auto P = [&](const std::string& n, Tensor<T> t) { return store.add(prefix + n, t); };
    w_in_x_ = P("in_proj_x.w", init::he_normal<T>({c, inner}, c, rng));
    b_in_x_ = P("in_proj_x.b", Tensor<T>::zeros({inner}));
    w_in_z_ = P("in_proj_gate.w", init::he_normal<T>({c, inner}, c, rng));
    b_in_z_ = P("in_proj_gate.b", Tensor<T>::zeros({inner}));
    conv_w_ = P("conv1d.w", init::he_normal<T>({inner, cfg.conv_kernel}, cfg.conv_kernel, rng));
    conv_b_ = P("conv1d.b", Tensor<T>::zeros({inner}));
    w_dt1_ = P("dt_proj.w1", init::he_normal<T>({inner, dt_rank_}, inner, rng));
    w_dt2_ = P("dt_proj.w2", init::he_normal<T>({dt_rank_, inner}, dt_rank_, rng));
    // softplus(bias) spread log-uniformly over [1e-3, 1e-1]
    Tensor<T> bdt = Tensor<T>::zeros({inner});
    for (int i = 0; i < inner; ++i) {
      const double dt = 1e-3 * std::pow(100.0, rng.uniform());
      bdt.data()[i] = static_cast<T>(std::log(std::expm1(dt)));
    }
    b_dt_ = P("dt_proj.b", bdt);
    w_b_ = P("b_proj.w", init::he_normal<T>({inner, cfg.state_dim}, inner, rng));
    w_c_ = P("c_proj.w", init::he_normal<T>({inner, cfg.state_dim}, inner, rng));
    // decay magnitudes 1..N per state, log-stored
    Tensor<T> alog = Tensor<T>::zeros({inner, cfg.state_dim});
    for (int d = 0; d < inner; ++d)
      for (int n = 0; n < cfg.state_dim; ++n)
        alog.data()[d * cfg.state_dim + n] = static_cast<T>(std::log(static_cast<double>(n + 1)));
    a_log_ = P("a_log", alog);
    d_skip_ = P("d_skip", Tensor<T>::full({inner}, T(1)));
    w_out_ = P("out_proj.w", init::he_normal<T>({inner, c}, inner, rng));
    b_out_ = P("out_proj.b", Tensor<T>::zeros({c}));
    cw1_ = P("conv_branch.w1", init::he_normal<T>({c, c, 3, 3}, 9 * c, rng));
    cb1_ = P("conv_branch.b1", Tensor<T>::zeros({c}));
    cw2_ = P("conv_branch.w2", init::he_normal<T>({c, c, 3, 3}, 9 * c, rng));
    cb2_ = P("conv_branch.b2", Tensor<T>::zeros({c}));
    ln_g_ = P("norm.gamma", Tensor<T>::full({c}, T(1)));
    ln_b_ = P("norm.beta", Tensor<T>::zeros({c}));
  }

  Tensor<T> forward(const Tensor<T>& grid) const {
    require(grid.ndim() == 3 && grid.dim(0) == cfg_.channels, "spss-block",
            "expected (" + std::to_string(cfg_.channels) + ",H,W), got " + shape_str(grid.shape()));
    const int64_t C = grid.dim(0), H = grid.dim(1), W = grid.dim(2);
    ScanGrid sg(H, W);  // validates geometry

    Tensor<T> seq = grid_to_seq(grid);
    Tensor<T> u_all = linear(seq, w_in_x_, b_in_x_);
    Tensor<T> gate = silu(linear(seq, w_in_z_, b_in_z_));
    Tensor<T> a = scalar_mul(exp_op(a_log_), T(-1));

    Tensor<T> acc;
    bool first = true;
    for (int di : cfg_.directions) {
      const ScanOrder& so = cached_order(H, ScanDirection::from_index(di));
      Tensor<T> u = gather_rows(u_all, so.order);
      u = silu(depthwise_conv1d(u, conv_w_, &conv_b_));
      Tensor<T> dt = softplus(linear(matmul(u, w_dt1_), w_dt2_, b_dt_));
      Tensor<T> bp = matmul(u, w_b_);
      Tensor<T> cp = matmul(u, w_c_);
      auto [abar, bbar] = discretize(a, bp, dt);
      Tensor<T> ys = selective_scan_sequential(abar, bbar, cp, u, d_skip_);
      ys = scatter_rows(ys, so.order);
      acc = first ? ys : add(acc, ys);
      first = false;
    }
    Tensor<T> mamba = scalar_mul(acc, T(1) / T(cfg_.directions.size()));
    mamba = mul(mamba, gate);
    mamba = linear(mamba, w_out_, b_out_);
    Tensor<T> mamba_grid = seq_to_grid(mamba, C, H, W);

    Tensor<T> conv = silu(conv2d(grid, cw1_, cb1_, 1, 1));
    conv = silu(conv2d(conv, cw2_, cb2_, 1, 1));

    Tensor<T> summed = add(add(grid, mamba_grid), conv);
    Tensor<T> normed = layer_norm(grid_to_seq(summed), ln_g_, ln_b_, T(1e-5));
    return seq_to_grid(normed, C, H, W);
  }

  const SpssBlockConfig& config() const { return cfg_; }

 private:
  SpssBlockConfig cfg_;
  int dt_rank_ = 1;
  Tensor<T> w_in_x_, b_in_x_, w_in_z_, b_in_z_, conv_w_, conv_b_;
  Tensor<T> w_dt1_, w_dt2_, b_dt_, w_b_, w_c_, a_log_, d_skip_, w_out_, b_out_;
  Tensor<T> cw1_, cb1_, cw2_, cb2_, ln_g_, ln_b_;
};

// ---------------------------------------------------------------------------
// Decoder: four SPSS stages from the bottleneck back to stride 4
// ---------------------------------------------------------------------------

struct DecoderConfig {
  int fused_channels = 0;
  int64_t fused_side = 0;                    // stride-8 grid side
  std::array<int, 4> stage_widths{};         // deep to shallow
  std::array<int, 4> stage_depths{};         // number of SPSS blocks per stage
  std::array<int, 3> recon_channels{};       // level 1, 2, 3 output widths
  int state_dim = 16;
  int expansion = 2;
  int conv_kernel = 4;
  std::vector<int> directions = {0, 1, 2, 3, 4, 5, 6, 7};

  std::array<int64_t, 4> stage_sides() const {
    return {fused_side / 2, fused_side, fused_side * 2, fused_side * 2};
  }
};

// Stage 0 runs at stride 16 on a pooled copy of the fused feature, stages 1
// and 2 upsample back to strides 8 and 4, stage 3 refines at stride 4.
// Reconstructions: stage 0 -> level 3, stage 1 -> level 2, stage 3 -> level 1.
template <typename T>
class Decoder {
 public:
  Decoder(const DecoderConfig& cfg, ParamStore<T>& store, Rng& rng) : cfg_(cfg) {
    auto P = [&](const std::string& n, Tensor<T> t) { return store.add("decoder." + n, t); };
    adapter_w_ = P("adapter.w",
                   init::he_normal<T>({cfg.stage_widths[0], cfg.fused_channels, 1, 1},
                                      cfg.fused_channels, rng));
    adapter_b_ = P("adapter.b", Tensor<T>::zeros({cfg.stage_widths[0]}));
    for (int s = 0; s < 4; ++s) {
      SpssBlockConfig bc;
      bc.channels = cfg.stage_widths[static_cast<size_t>(s)];
      bc.state_dim = cfg.state_dim;
      bc.expansion = cfg.expansion;
      bc.conv_kernel = cfg.conv_kernel;
      bc.directions = cfg.directions;
      for (int b = 0; b < cfg.stage_depths[static_cast<size_t>(s)]; ++b) {
        stages_[static_cast<size_t>(s)].emplace_back(
            bc, "decoder.stage" + std::to_string(s) + ".block" + std::to_string(b) + ".", store,
            rng);
      }
      if (s < 3) {
        const int wi = cfg.stage_widths[static_cast<size_t>(s)];
        const int wo = cfg.stage_widths[static_cast<size_t>(s + 1)];
        trans_w_[static_cast<size_t>(s)] =
            P("transition" + std::to_string(s) + ".w", init::he_normal<T>({wo, wi, 1, 1}, wi, rng));
        trans_b_[static_cast<size_t>(s)] =
            P("transition" + std::to_string(s) + ".b", Tensor<T>::zeros({wo}));
      }
    }
    const std::array<int, 3> head_stage = {3, 1, 0};  // levels 1..3
    for (int lvl = 0; lvl < 3; ++lvl) {
      const int wi = cfg.stage_widths[static_cast<size_t>(head_stage[static_cast<size_t>(lvl)])];
      const int wo = cfg.recon_channels[static_cast<size_t>(lvl)];
      head_w_[static_cast<size_t>(lvl)] =
          P("head_l" + std::to_string(lvl + 1) + ".w", init::he_normal<T>({wo, wi, 1, 1}, wi, rng));
      head_b_[static_cast<size_t>(lvl)] =
          P("head_l" + std::to_string(lvl + 1) + ".b", Tensor<T>::zeros({wo}));
    }
  }

  // fused (Cf, fs, fs) -> reconstructed levels {l1, l2, l3} at strides 4/8/16.
  std::array<Tensor<T>, 3> forward(const Tensor<T>& fused) const {
    require(fused.ndim() == 3 && fused.dim(0) == cfg_.fused_channels &&
                fused.dim(1) == cfg_.fused_side && fused.dim(2) == cfg_.fused_side,
            "decoder", "fused feature shape " + shape_str(fused.shape()) + " does not match config");
    Tensor<T> x = conv2d(avg_pool2x2(fused), adapter_w_, adapter_b_, 1, 0);
    std::array<Tensor<T>, 4> stage_out;
    for (int s = 0; s < 4; ++s) {
      for (const auto& block : stages_[static_cast<size_t>(s)]) x = block.forward(x);
      stage_out[static_cast<size_t>(s)] = x;
      if (s < 3) {
        if (s < 2) x = upsample_nearest2x(x);
        x = conv2d(x, trans_w_[static_cast<size_t>(s)], trans_b_[static_cast<size_t>(s)], 1, 0);
      }
    }
    std::array<Tensor<T>, 3> recon;
    const std::array<int, 3> head_stage = {3, 1, 0};
    for (int lvl = 0; lvl < 3; ++lvl)
      recon[static_cast<size_t>(lvl)] =
          conv2d(stage_out[static_cast<size_t>(head_stage[static_cast<size_t>(lvl)])],
                 head_w_[static_cast<size_t>(lvl)], head_b_[static_cast<size_t>(lvl)], 1, 0);
    return recon;
  }

  const DecoderConfig& config() const { return cfg_; }

 private:
  DecoderConfig cfg_;
  Tensor<T> adapter_w_, adapter_b_;
  std::array<std::vector<SpssBlock<T>>, 4> stages_;
  std::array<Tensor<T>, 3> trans_w_, trans_b_;
  std::array<Tensor<T>, 3> head_w_, head_b_;
};

}  // namespace spm
