#include "tfddrl/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tfddrl/errors.hpp"

namespace tfddrl::nn {

namespace {

using Vec = std::vector<double>;
using Rows = std::vector<Vec>;

constexpr double kNormEps = 1e-5;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Rows zeros(std::size_t rows, std::size_t cols) { return Rows(rows, Vec(cols, 0.0)); }

// y += W x, W row-major rows x cols.
void mv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w + i * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    y[i] += s;
  }
}

// gW += dy x^T; dx += W^T dy (dx may be null).
void mv_backward(const double* w, double* gw, std::size_t rows, std::size_t cols, const double* x,
                 const double* dy, double* dx) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double d = dy[i];
    if (d == 0.0) continue;
    double* grow = gw + i * cols;
    const double* row = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) grow[j] += d * x[j];
    if (dx) {
      for (std::size_t j = 0; j < cols; ++j) dx[j] += d * row[j];
    }
  }
}

void check_finite(const Vec& v, const std::string& layer) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError("non-finite activation in " + layer);
  }
}

void check_finite(const Rows& rows, const std::string& layer) {
  for (const auto& r : rows) check_finite(r, layer);
}

}  // namespace

struct Network::Tape {
  std::size_t length = 0;
  std::size_t first_position = 0;  // positional-embedding row of window entry 0
  std::vector<Rows> trunk_in;      // per layer, per position
  std::vector<Rows> trunk_pre;
  Rows embed;

  struct BlockTape {
    Rows x, xhat1, y1, q, k, v, ctx, o_pre, o, r1, z1, h1, g1;
    Rows xhat2, y2, u_pre, u, m_pre, m, r2, z2, h2, out;
    Vec rstd1, rstd2;
    Vec attn;  // heads x length x length
  };
  std::vector<BlockTape> blocks;

  const Rows& output() const { return blocks.empty() ? embed : blocks.back().out; }
};

Network::Dense Network::add_dense(const std::string& name, std::size_t in, std::size_t out) {
  Dense d;
  d.in = in;
  d.out = out;
  d.w = layout_.add(name + ".w", in * out);
  d.b = layout_.add(name + ".b", out);
  return d;
}

Network::Gate Network::add_gate(const std::string& name) {
  const std::size_t d = config_.model_dim();
  Gate g;
  g.wr = layout_.add(name + ".wr", d * d);
  g.ur = layout_.add(name + ".ur", d * d);
  g.wz = layout_.add(name + ".wz", d * d);
  g.uz = layout_.add(name + ".uz", d * d);
  g.wg = layout_.add(name + ".wg", d * d);
  g.ug = layout_.add(name + ".ug", d * d);
  g.bg = layout_.add(name + ".bg", d);
  return g;
}

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  std::size_t in = config_.input_dim;
  for (std::size_t l = 0; l < config_.fc_units.size(); ++l) {
    trunk_.push_back(add_dense("trunk" + std::to_string(l), in, config_.fc_units[l]));
    in = config_.fc_units[l];
  }
  const std::size_t d = config_.model_dim();
  const std::size_t a = config_.attention_dim();
  if (config_.tf_units > 0) positional_ = layout_.add("positional", config_.context * d);
  for (std::size_t b = 0; b < config_.tf_units; ++b) {
    const std::string n = "block" + std::to_string(b);
    Block blk;
    blk.ln1.gamma = layout_.add(n + ".ln1.gamma", d);
    blk.ln1.beta = layout_.add(n + ".ln1.beta", d);
    blk.q = add_dense(n + ".q", d, a);
    blk.k = add_dense(n + ".k", d, a);
    blk.v = add_dense(n + ".v", d, a);
    blk.o = add_dense(n + ".o", a, d);
    blk.gate1 = add_gate(n + ".gate1");
    blk.ln2.gamma = layout_.add(n + ".ln2.gamma", d);
    blk.ln2.beta = layout_.add(n + ".ln2.beta", d);
    blk.mlp1 = add_dense(n + ".mlp1", d, config_.mlp_dim);
    blk.mlp2 = add_dense(n + ".mlp2", config_.mlp_dim, d);
    blk.gate2 = add_gate(n + ".gate2");
    blocks_.push_back(blk);
  }
  policy_head_ = add_dense("policy", d, config_.action_count);
  value_head_ = add_dense("value", d, 1);
}

ParameterSet Network::initial_parameters(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  ParameterSet out;
  out.values.assign(layout_.size(), 0.0);
  auto fill = [&](std::size_t offset, std::size_t count, double limit) {
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < count; ++i) out.values[offset + i] = u(rng);
  };
  auto glorot = [](std::size_t in, std::size_t outn) { return std::sqrt(6.0 / double(in + outn)); };
  auto he = [](std::size_t in) { return std::sqrt(6.0 / double(in)); };
  const std::size_t d = config_.model_dim();

  for (const auto& t : trunk_) fill(t.w, t.in * t.out, he(t.in));
  if (config_.tf_units > 0) fill(positional_, config_.context * d, 0.1);
  auto init_gate = [&](const Gate& g) {
    for (std::size_t off : {g.wr, g.ur, g.wz, g.uz, g.wg, g.ug}) fill(off, d * d, glorot(d, d));
    std::fill_n(out.values.begin() + g.bg, d, config_.gate_bias);
  };
  for (const auto& b : blocks_) {
    std::fill_n(out.values.begin() + b.ln1.gamma, d, 1.0);
    std::fill_n(out.values.begin() + b.ln2.gamma, d, 1.0);
    for (const Dense* dn : {&b.q, &b.k, &b.v, &b.o, &b.mlp2}) {
      fill(dn->w, dn->in * dn->out, glorot(dn->in, dn->out));
    }
    fill(b.mlp1.w, b.mlp1.in * b.mlp1.out, he(b.mlp1.in));
    init_gate(b.gate1);
    init_gate(b.gate2);
  }
  // Small heads: near-uniform initial policy and near-zero values.
  fill(policy_head_.w, d * config_.action_count, 0.1 * glorot(d, config_.action_count));
  fill(value_head_.w, d, 0.1 * glorot(d, 1));
  return out;
}

namespace {

void norm_forward(const double* gamma, const double* beta, std::size_t d, const Vec& x,
                  Vec& xhat, double& rstd, Vec& y) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= double(d);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= double(d);
  rstd = 1.0 / std::sqrt(var + kNormEps);
  xhat.resize(d);
  y.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    xhat[i] = (x[i] - mean) * rstd;
    y[i] = gamma[i] * xhat[i] + beta[i];
  }
}

void norm_backward(const double* gamma, double* ggamma, double* gbeta, std::size_t d,
                   const Vec& xhat, double rstd, const Vec& dy, Vec& dx) {
  Vec dxhat(d);
  double sum = 0.0, sum_x = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    ggamma[i] += dy[i] * xhat[i];
    gbeta[i] += dy[i];
    dxhat[i] = dy[i] * gamma[i];
    sum += dxhat[i];
    sum_x += dxhat[i] * xhat[i];
  }
  for (std::size_t i = 0; i < d; ++i) {
    dx[i] += rstd / double(d) * (double(d) * dxhat[i] - sum - xhat[i] * sum_x);
  }
}

}  // namespace

void Network::run_forward(std::span<const double> params, StateWindow window, Tape& tape) const {
  if (params.size() != layout_.size()) {
    throw ShapeError("parameter vector has " + std::to_string(params.size()) + " entries, expected " +
                     std::to_string(layout_.size()));
  }
  if (window.empty()) throw ShapeError("state window is empty");
  if (config_.tf_units == 0) window = window.subspan(window.size() - 1);
  if (window.size() > config_.context) {
    throw ShapeError("state window longer than the context of " + std::to_string(config_.context));
  }
  for (const auto* s : window) {
    if (s->values().size() != config_.input_dim) {
      throw ShapeError("state has " + std::to_string(s->values().size()) + " features, expected " +
                       std::to_string(config_.input_dim));
    }
  }
  for (double v : params) {
    if (!std::isfinite(v)) throw NumericError("non-finite parameter");
  }

  const double* p = params.data();
  const std::size_t len = window.size();
  const std::size_t d = config_.model_dim();
  tape.length = len;
  tape.first_position = config_.context - len;
  tape.trunk_in.assign(trunk_.size(), Rows(len));
  tape.trunk_pre.assign(trunk_.size(), Rows(len));
  tape.embed.assign(len, Vec());

  for (std::size_t pos = 0; pos < len; ++pos) {
    const auto raw = window[pos]->values();
    Vec h(raw.begin(), raw.end());
    for (std::size_t l = 0; l < trunk_.size(); ++l) {
      const Dense& t = trunk_[l];
      Vec z(p + t.b, p + t.b + t.out);
      mv(p + t.w, t.out, t.in, h.data(), z.data());
      tape.trunk_in[l][pos] = std::move(h);
      h = z;
      for (double& v : h) v = std::max(v, 0.0);
      tape.trunk_pre[l][pos] = std::move(z);
    }
    if (config_.tf_units > 0) {
      const double* pe = p + positional_ + (tape.first_position + pos) * d;
      for (std::size_t i = 0; i < d; ++i) h[i] += pe[i];
    }
    tape.embed[pos] = std::move(h);
  }
  check_finite(tape.embed, "trunk");

  const std::size_t heads = config_.heads;
  const std::size_t hd = config_.head_dim;
  const std::size_t a = config_.attention_dim();
  const double scale = 1.0 / std::sqrt(double(hd));

  auto gate = [&](const Gate& g, const Vec& x, const Vec& y, Vec& r, Vec& z, Vec& h, Vec& out) {
    r.assign(d, 0.0);
    z.assign(d, 0.0);
    h.assign(d, 0.0);
    out.assign(d, 0.0);
    mv(p + g.wr, d, d, y.data(), r.data());
    mv(p + g.ur, d, d, x.data(), r.data());
    mv(p + g.wz, d, d, y.data(), z.data());
    mv(p + g.uz, d, d, x.data(), z.data());
    Vec rx(d);
    for (std::size_t i = 0; i < d; ++i) {
      r[i] = sigmoid(r[i]);
      z[i] = sigmoid(z[i] - p[g.bg + i]);
      rx[i] = r[i] * x[i];
    }
    mv(p + g.wg, d, d, y.data(), h.data());
    mv(p + g.ug, d, d, rx.data(), h.data());
    for (std::size_t i = 0; i < d; ++i) {
      h[i] = std::tanh(h[i]);
      out[i] = (1.0 - z[i]) * x[i] + z[i] * h[i];
    }
  };
  auto dense = [&](const Dense& dn, const Vec& x) {
    Vec y(p + dn.b, p + dn.b + dn.out);
    mv(p + dn.w, dn.out, dn.in, x.data(), y.data());
    return y;
  };

  tape.blocks.assign(blocks_.size(), {});
  const Rows* input = &tape.embed;
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const Block& b = blocks_[bi];
    auto& t = tape.blocks[bi];
    const std::string name = "block" + std::to_string(bi);
    t.x = *input;
    t.xhat1.resize(len);
    t.y1.resize(len);
    t.rstd1.resize(len);
    t.q.resize(len);
    t.k.resize(len);
    t.v.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      norm_forward(p + b.ln1.gamma, p + b.ln1.beta, d, t.x[i], t.xhat1[i], t.rstd1[i], t.y1[i]);
      t.q[i] = dense(b.q, t.y1[i]);
      t.k[i] = dense(b.k, t.y1[i]);
      t.v[i] = dense(b.v, t.y1[i]);
    }

    t.attn.assign(heads * len * len, 0.0);
    t.ctx = zeros(len, a);
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < len; ++i) {
        double* row = &t.attn[(h * len + i) * len];
        double mx = -INFINITY;
        for (std::size_t j = 0; j < len; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < hd; ++c) s += t.q[i][h * hd + c] * t.k[j][h * hd + c];
          row[j] = s * scale;
          mx = std::max(mx, row[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
          row[j] = std::exp(row[j] - mx);
          z += row[j];
        }
        for (std::size_t j = 0; j < len; ++j) {
          row[j] /= z;
          for (std::size_t c = 0; c < hd; ++c) t.ctx[i][h * hd + c] += row[j] * t.v[j][h * hd + c];
        }
      }
    }
    check_finite(t.ctx, name + ".attention");

    t.o_pre.resize(len);
    t.o.resize(len);
    t.r1.resize(len);
    t.z1.resize(len);
    t.h1.resize(len);
    t.g1.resize(len);
    t.xhat2.resize(len);
    t.y2.resize(len);
    t.rstd2.resize(len);
    t.u_pre.resize(len);
    t.u.resize(len);
    t.m_pre.resize(len);
    t.m.resize(len);
    t.r2.resize(len);
    t.z2.resize(len);
    t.h2.resize(len);
    t.out.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      t.o_pre[i] = dense(b.o, t.ctx[i]);
      t.o[i] = t.o_pre[i];
      for (double& v : t.o[i]) v = std::max(v, 0.0);
      gate(b.gate1, t.x[i], t.o[i], t.r1[i], t.z1[i], t.h1[i], t.g1[i]);

      norm_forward(p + b.ln2.gamma, p + b.ln2.beta, d, t.g1[i], t.xhat2[i], t.rstd2[i], t.y2[i]);
      t.u_pre[i] = dense(b.mlp1, t.y2[i]);
      t.u[i] = t.u_pre[i];
      for (double& v : t.u[i]) v = std::max(v, 0.0);
      t.m_pre[i] = dense(b.mlp2, t.u[i]);
      t.m[i] = t.m_pre[i];
      for (double& v : t.m[i]) v = std::max(v, 0.0);
      gate(b.gate2, t.g1[i], t.m[i], t.r2[i], t.z2[i], t.h2[i], t.out[i]);
    }
    check_finite(t.out, name);
    input = &t.out;
  }
}

void Network::run_backward(std::span<const double> params, const Tape& tape,
                           std::span<const double> d_last, std::span<double> grad) const {
  const double* p = params.data();
  double* g = grad.data();
  const std::size_t len = tape.length;
  const std::size_t d = config_.model_dim();
  const std::size_t heads = config_.heads;
  const std::size_t hd = config_.head_dim;
  const std::size_t a = config_.attention_dim();
  const double scale = 1.0 / std::sqrt(double(hd));

  Rows dcur = zeros(len, d);
  std::copy(d_last.begin(), d_last.end(), dcur[len - 1].begin());

  auto dense_back = [&](const Dense& dn, const Vec& x, const Vec& dy, Vec* dx) {
    for (std::size_t i = 0; i < dn.out; ++i) g[dn.b + i] += dy[i];
    mv_backward(p + dn.w, g + dn.w, dn.out, dn.in, x.data(), dy.data(), dx ? dx->data() : nullptr);
  };
  // Accumulates into dx and dy.
  auto gate_back = [&](const Gate& gt, const Vec& x, const Vec& y, const Vec& r, const Vec& z,
                       const Vec& h, const Vec& dg, Vec& dx, Vec& dy) {
    Vec dz(d), dah(d), daz(d), dar(d), rx(d), drx(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      dz[i] = dg[i] * (h[i] - x[i]);
      dx[i] += dg[i] * (1.0 - z[i]);
      dah[i] = dg[i] * z[i] * (1.0 - h[i] * h[i]);
      daz[i] = dz[i] * z[i] * (1.0 - z[i]);
      rx[i] = r[i] * x[i];
      g[gt.bg + i] -= daz[i];
    }
    mv_backward(p + gt.wg, g + gt.wg, d, d, y.data(), dah.data(), dy.data());
    mv_backward(p + gt.ug, g + gt.ug, d, d, rx.data(), dah.data(), drx.data());
    for (std::size_t i = 0; i < d; ++i) {
      dx[i] += drx[i] * r[i];
      dar[i] = drx[i] * x[i] * r[i] * (1.0 - r[i]);
    }
    mv_backward(p + gt.wz, g + gt.wz, d, d, y.data(), daz.data(), dy.data());
    mv_backward(p + gt.uz, g + gt.uz, d, d, x.data(), daz.data(), dx.data());
    mv_backward(p + gt.wr, g + gt.wr, d, d, y.data(), dar.data(), dy.data());
    mv_backward(p + gt.ur, g + gt.ur, d, d, x.data(), dar.data(), dx.data());
  };
  auto relu_mask = [](Vec dv, const Vec& pre) {
    for (std::size_t i = 0; i < dv.size(); ++i) {
      if (pre[i] <= 0.0) dv[i] = 0.0;
    }
    return dv;
  };

  for (std::size_t bi = blocks_.size(); bi-- > 0;) {
    const Block& b = blocks_[bi];
    const auto& t = tape.blocks[bi];

    Rows dg1 = zeros(len, d);
    for (std::size_t i = 0; i < len; ++i) {
      Vec dm(d, 0.0);
      gate_back(b.gate2, t.g1[i], t.m[i], t.r2[i], t.z2[i], t.h2[i], dcur[i], dg1[i], dm);
      Vec du(config_.mlp_dim, 0.0);
      dense_back(b.mlp2, t.u[i], relu_mask(dm, t.m_pre[i]), &du);
      Vec dy2(d, 0.0);
      dense_back(b.mlp1, t.y2[i], relu_mask(du, t.u_pre[i]), &dy2);
      norm_backward(p + b.ln2.gamma, g + b.ln2.gamma, g + b.ln2.beta, d, t.xhat2[i], t.rstd2[i], dy2,
                    dg1[i]);
    }

    Rows dx = zeros(len, d);
    Rows dctx = zeros(len, a);
    for (std::size_t i = 0; i < len; ++i) {
      Vec dout(d, 0.0);
      gate_back(b.gate1, t.x[i], t.o[i], t.r1[i], t.z1[i], t.h1[i], dg1[i], dx[i], dout);
      dense_back(b.o, t.ctx[i], relu_mask(dout, t.o_pre[i]), &dctx[i]);
    }

    Rows dq = zeros(len, a), dk = zeros(len, a), dv = zeros(len, a);
    Vec dalpha(len);
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < len; ++i) {
        const double* row = &t.attn[(h * len + i) * len];
        double dot = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < hd; ++c) {
            s += dctx[i][h * hd + c] * t.v[j][h * hd + c];
            dv[j][h * hd + c] += row[j] * dctx[i][h * hd + c];
          }
          dalpha[j] = s;
          dot += row[j] * s;
        }
        for (std::size_t j = 0; j < len; ++j) {
          const double ds = row[j] * (dalpha[j] - dot) * scale;
          if (ds == 0.0) continue;
          for (std::size_t c = 0; c < hd; ++c) {
            dq[i][h * hd + c] += ds * t.k[j][h * hd + c];
            dk[j][h * hd + c] += ds * t.q[i][h * hd + c];
          }
        }
      }
    }

    for (std::size_t i = 0; i < len; ++i) {
      Vec dy1(d, 0.0);
      dense_back(b.q, t.y1[i], dq[i], &dy1);
      dense_back(b.k, t.y1[i], dk[i], &dy1);
      dense_back(b.v, t.y1[i], dv[i], &dy1);
      norm_backward(p + b.ln1.gamma, g + b.ln1.gamma, g + b.ln1.beta, d, t.xhat1[i], t.rstd1[i], dy1,
                    dx[i]);
    }
    dcur = std::move(dx);
  }

  for (std::size_t pos = 0; pos < len; ++pos) {
    if (config_.tf_units > 0) {
      double* pe = g + positional_ + (tape.first_position + pos) * d;
      for (std::size_t i = 0; i < d; ++i) pe[i] += dcur[pos][i];
    }
    Vec dh = dcur[pos];
    for (std::size_t l = trunk_.size(); l-- > 0;) {
      const Dense& t = trunk_[l];
      Vec dpre = relu_mask(std::move(dh), tape.trunk_pre[l][pos]);
      Vec dx(t.in, 0.0);
      dense_back(t, tape.trunk_in[l][pos], dpre, l > 0 ? &dx : nullptr);
      dh = std::move(dx);
    }
  }
}

std::vector<double> masked_softmax(std::span<const double> logits, const mdp::ActionMask& mask) {
  if (mask.size() != logits.size()) throw ShapeError("mask length differs from logit count");
  double mx = -INFINITY;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) mx = std::max(mx, logits[i]);
  }
  if (mx == -INFINITY) throw PreconditionError("action mask has no feasible entry");
  std::vector<double> out(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) {
      out[i] = std::exp(logits[i] - mx);
      z += out[i];
    }
  }
  for (double& v : out) v /= z;
  return out;
}

ForwardOutput Network::forward(std::span<const double> params, StateWindow window,
                               const mdp::ActionMask& mask) const {
  Tape tape;
  run_forward(params, window, tape);
  const Vec& rep = tape.output()[tape.length - 1];
  const double* p = params.data();

  ForwardOutput out;
  out.logits.assign(p + policy_head_.b, p + policy_head_.b + policy_head_.out);
  mv(p + policy_head_.w, policy_head_.out, policy_head_.in, rep.data(), out.logits.data());
  out.value = p[value_head_.b];
  mv(p + value_head_.w, 1, value_head_.in, rep.data(), &out.value);
  check_finite(out.logits, "policy head");
  if (!std::isfinite(out.value)) throw NumericError("non-finite activation in value head");
  out.probs = masked_softmax(out.logits, mask);
  for (auto& bt : tape.blocks) {
    out.keys.push_back(std::move(bt.k));
    out.values.push_back(std::move(bt.v));
  }
  return out;
}

std::vector<std::vector<double>> Network::encode_window(std::span<const double> params,
                                                        StateWindow window) const {
  Tape tape;
  run_forward(params, window, tape);
  return tape.output();
}

namespace {

struct SampleLoss {
  double value = 0.0, policy = 0.0, entropy = 0.0;
  double d_value = 0.0;
  Vec d_logits;
};

SampleLoss sample_loss(const ForwardOutput& f, const GradientSample& s, const LossWeights& w) {
  if (s.action < 0 || s.action >= static_cast<int>(f.probs.size()) || !s.mask[s.action]) {
    throw PreconditionError("sampled action is not feasible under its mask");
  }
  SampleLoss out;
  const double diff = s.value_target - f.value;
  out.value = diff * diff;
  out.policy = -s.rho * s.advantage * std::log(f.probs[s.action]);
  double plogp = 0.0;
  for (std::size_t i = 0; i < f.probs.size(); ++i) {
    if (f.probs[i] > 0.0) plogp += f.probs[i] * std::log(f.probs[i]);
  }
  out.entropy = plogp;

  const double iw = s.is_weight;
  out.d_value = iw * w.value * -2.0 * diff;
  out.d_logits.assign(f.probs.size(), 0.0);
  for (std::size_t b = 0; b < f.probs.size(); ++b) {
    if (!s.mask[b]) continue;
    const double pb = f.probs[b];
    const double onehot = b == static_cast<std::size_t>(s.action) ? 1.0 : 0.0;
    double dl = w.policy * -s.rho * s.advantage * (onehot - pb);
    if (pb > 0.0) dl += w.entropy * pb * (std::log(pb) - plogp);
    out.d_logits[b] = iw * dl;
  }
  return out;
}

void add_report(LossReport& r, const SampleLoss& l, double iw, const LossWeights& w) {
  r.value += iw * l.value;
  r.policy += iw * l.policy;
  r.entropy += iw * l.entropy;
  r.total += iw * (w.value * l.value + w.policy * l.policy + w.entropy * l.entropy);
}

}  // namespace

LossReport Network::evaluate_loss(std::span<const double> params,
                                  std::span<const GradientSample> batch,
                                  const LossWeights& weights) const {
  LossReport report;
  for (const auto& s : batch) {
    const auto f = forward(params, s.window, s.mask);
    add_report(report, sample_loss(f, s, weights), s.is_weight, weights);
  }
  return report;
}

LossReport Network::accumulate_gradients(std::span<const double> params,
                                         std::span<const GradientSample> batch,
                                         const LossWeights& weights, std::span<double> grad) const {
  if (grad.size() != layout_.size()) throw ShapeError("gradient vector has the wrong size");
  LossReport report;
  const std::size_t d = config_.model_dim();
  const double* p = params.data();
  double* g = grad.data();
  for (const auto& s : batch) {
    Tape tape;
    run_forward(params, s.window, tape);
    const Vec& rep = tape.output()[tape.length - 1];

    ForwardOutput f;
    f.logits.assign(p + policy_head_.b, p + policy_head_.b + policy_head_.out);
    mv(p + policy_head_.w, policy_head_.out, d, rep.data(), f.logits.data());
    f.value = p[value_head_.b];
    mv(p + value_head_.w, 1, d, rep.data(), &f.value);
    check_finite(f.logits, "policy head");
    if (!std::isfinite(f.value)) throw NumericError("non-finite activation in value head");
    f.probs = masked_softmax(f.logits, s.mask);

    const SampleLoss l = sample_loss(f, s, weights);
    add_report(report, l, s.is_weight, weights);

    Vec d_rep(d, 0.0);
    for (std::size_t i = 0; i < policy_head_.out; ++i) g[policy_head_.b + i] += l.d_logits[i];
    mv_backward(p + policy_head_.w, g + policy_head_.w, policy_head_.out, d, rep.data(),
                l.d_logits.data(), d_rep.data());
    g[value_head_.b] += l.d_value;
    mv_backward(p + value_head_.w, g + value_head_.w, 1, d, rep.data(), &l.d_value, d_rep.data());
    run_backward(params, tape, d_rep, grad);
  }
  for (double v : grad) {
    if (!std::isfinite(v)) throw NumericError("non-finite gradient");
  }
  return report;
}

}  // namespace tfddrl::nn
