#include "padist/cnn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "padist/error.h"
#include "padist/random.h"

namespace padist::ml {

CNNArch CNNArch::desk(int input_size) {
  CNNArch a;
  a.input_size = input_size;
  a.stages = {{2, 8}, {2, 16}};
  a.dense = {128};
  return a;
}

void CNNArch::validate() const {
  if (input_size < 1) throw InvalidParameter("CNN input size must be >= 1");
  int s = input_size;
  for (const auto& st : stages) {
    if (st.num_layers < 1 || st.filters < 1) {
      throw InvalidParameter("CNN stages need >= 1 layer and >= 1 filter");
    }
    s /= 2;
    if (s < 1) {
      throw InvalidParameter("CNN with " + std::to_string(stages.size()) +
                             " stages pools a " + std::to_string(input_size) +
                             "x" + std::to_string(input_size) + " input below 1x1");
    }
  }
  for (int d : dense) {
    if (d < 1) throw InvalidParameter("CNN dense widths must be >= 1");
  }
}

std::string CNNArch::describe() const {
  std::ostringstream os;
  os << "input " << input_size << "x" << input_size;
  for (const auto& st : stages) os << " | conv " << st.num_layers << "x" << st.filters << " + pool";
  for (int d : dense) os << " | dense " << d;
  os << " | out 1";
  return os.str();
}

std::size_t LayerSpec::fan_in() const {
  if (kind == LayerKind::kConv) return static_cast<std::size_t>(in_c) * 9;
  if (kind == LayerKind::kDense) return in_size();
  return 0;
}

std::vector<LayerSpec> build_layout(const CNNArch& arch) {
  arch.validate();
  std::vector<LayerSpec> out;
  int c = 1, h = arch.input_size, w = arch.input_size;
  std::size_t off = 0;
  for (const auto& st : arch.stages) {
    for (int l = 0; l < st.num_layers; ++l) {
      LayerSpec s;
      s.kind = LayerKind::kConv;
      s.in_c = c; s.in_h = h; s.in_w = w;
      s.out_c = st.filters; s.out_h = h; s.out_w = w;
      s.w_off = off;
      s.w_count = static_cast<std::size_t>(st.filters) * c * 9;
      off += s.w_count;
      s.b_off = off;
      s.b_count = st.filters;
      off += s.b_count;
      out.push_back(s);
      c = st.filters;
    }
    LayerSpec p;
    p.kind = LayerKind::kPool;
    p.in_c = c; p.in_h = h; p.in_w = w;
    p.out_c = c; p.out_h = h / 2; p.out_w = w / 2;
    p.w_off = p.b_off = off;
    p.relu = false;
    out.push_back(p);
    h /= 2;
    w /= 2;
  }
  int features = c * h * w;
  std::vector<int> widths = arch.dense;
  widths.push_back(1);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    LayerSpec s;
    s.kind = LayerKind::kDense;
    s.in_c = features; s.in_h = s.in_w = 1;
    s.out_c = widths[i]; s.out_h = s.out_w = 1;
    s.w_off = off;
    s.w_count = static_cast<std::size_t>(widths[i]) * features;
    off += s.w_count;
    s.b_off = off;
    s.b_count = widths[i];
    off += s.b_count;
    s.relu = i + 1 < widths.size();
    out.push_back(s);
    features = widths[i];
  }
  return out;
}

CNNModel::CNNModel(const CNNArch& a) : arch(a), layers(build_layout(a)) {
  const auto& last = layers.back();
  params.assign(last.b_off + last.b_count, 0.0);
}

std::size_t CNNModel::num_nonzero() const {
  return static_cast<std::size_t>(
      std::count_if(params.begin(), params.end(), [](double v) { return v != 0.0; }));
}

void CNNModel::validate() const {
  const auto expect = build_layout(arch);
  if (expect.size() != layers.size()) throw ShapeMismatch("CNN layer table does not match arch");
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const auto &a = expect[i], &b = layers[i];
    if (a.kind != b.kind || a.w_off != b.w_off || a.w_count != b.w_count ||
        a.b_off != b.b_off || a.b_count != b.b_count || a.out_size() != b.out_size()) {
      throw ShapeMismatch("CNN layer " + std::to_string(i) + " does not match arch");
    }
  }
  if (params.size() != expect.back().b_off + expect.back().b_count) {
    throw ShapeMismatch("CNN parameter count does not match arch");
  }
  for (double v : params) {
    if (!std::isfinite(v)) throw NumericError("CNN has non-finite parameters");
  }
}

void init_weights(CNNModel& model, uint64_t seed) {
  Engine eng(derive_seed(seed, "cnn_init", 0));
  for (const auto& l : model.layers) {
    if (l.kind == LayerKind::kPool) continue;
    const double a = std::sqrt(6.0 / static_cast<double>(l.fan_in()));
    for (std::size_t i = 0; i < l.w_count; ++i) {
      model.params[l.w_off + i] = a * (2.0 * uniform01(eng) - 1.0);
    }
    std::fill_n(model.params.begin() + l.b_off, l.b_count, 0.0);
  }
}

namespace {

void conv_forward(const LayerSpec& l, const double* p, const double* in, double* out) {
  const double* W = p + l.w_off;
  const double* B = p + l.b_off;
  const int H = l.in_h, Wd = l.in_w, C = l.in_c;
  for (int o = 0; o < l.out_c; ++o) {
    double* dst = out + static_cast<std::size_t>(o) * H * Wd;
    std::fill_n(dst, H * Wd, B[o]);
    for (int c = 0; c < C; ++c) {
      const double* src = in + static_cast<std::size_t>(c) * H * Wd;
      const double* k = W + (static_cast<std::size_t>(o) * C + c) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double wv = k[ky * 3 + kx];
          if (wv == 0.0) continue;
          const int dy = ky - 1, dx = kx - 1;
          const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
          const int x0 = std::max(0, -dx), x1 = std::min(Wd, Wd - dx);
          for (int y = y0; y < y1; ++y) {
            const double* s = src + (y + dy) * Wd + dx;
            double* d = dst + y * Wd;
            for (int x = x0; x < x1; ++x) d[x] += wv * s[x];
          }
        }
      }
    }
  }
  if (l.relu) {
    for (std::size_t i = 0; i < l.out_size(); ++i) out[i] = std::max(0.0, out[i]);
  }
}

void conv_backward(const LayerSpec& l, const double* p, const double* in, const double* out,
                   const double* dout, double* din, double* g) {
  const double* W = p + l.w_off;
  double* gW = g + l.w_off;
  double* gB = g + l.b_off;
  const int H = l.in_h, Wd = l.in_w, C = l.in_c;
  std::vector<double> dpre(dout, dout + l.out_size());
  if (l.relu) {
    for (std::size_t i = 0; i < dpre.size(); ++i) {
      if (!(out[i] > 0.0)) dpre[i] = 0.0;
    }
  }
  if (din) std::fill_n(din, l.in_size(), 0.0);
  for (int o = 0; o < l.out_c; ++o) {
    const double* dd = dpre.data() + static_cast<std::size_t>(o) * H * Wd;
    double bsum = 0.0;
    for (int i = 0; i < H * Wd; ++i) bsum += dd[i];
    gB[o] += bsum;
    for (int c = 0; c < C; ++c) {
      const double* src = in + static_cast<std::size_t>(c) * H * Wd;
      double* dsrc = din ? din + static_cast<std::size_t>(c) * H * Wd : nullptr;
      const std::size_t kbase = (static_cast<std::size_t>(o) * C + c) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const int dy = ky - 1, dx = kx - 1;
          const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
          const int x0 = std::max(0, -dx), x1 = std::min(Wd, Wd - dx);
          double acc = 0.0;
          const double wv = W[kbase + ky * 3 + kx];
          for (int y = y0; y < y1; ++y) {
            const double* s = src + (y + dy) * Wd + dx;
            const double* d = dd + y * Wd;
            for (int x = x0; x < x1; ++x) acc += d[x] * s[x];
            if (dsrc && wv != 0.0) {
              double* ds = dsrc + (y + dy) * Wd + dx;
              for (int x = x0; x < x1; ++x) ds[x] += wv * d[x];
            }
          }
          gW[kbase + ky * 3 + kx] += acc;
        }
      }
    }
  }
}

void pool_forward(const LayerSpec& l, const double* in, double* out, uint32_t* arg) {
  for (int c = 0; c < l.in_c; ++c) {
    for (int y = 0; y < l.out_h; ++y) {
      for (int x = 0; x < l.out_w; ++x) {
        uint32_t best = 0;
        double bv = -std::numeric_limits<double>::infinity();
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const uint32_t idx = static_cast<uint32_t>((c * l.in_h + 2 * y + dy) * l.in_w + 2 * x + dx);
            if (in[idx] > bv) {
              bv = in[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(c) * l.out_h + y) * l.out_w + x;
        out[o] = bv;
        arg[o] = best;
      }
    }
  }
}

void dense_forward(const LayerSpec& l, const double* p, const double* in, double* out) {
  const double* W = p + l.w_off;
  const double* B = p + l.b_off;
  const std::size_t n = l.in_size();
  for (int j = 0; j < l.out_c; ++j) {
    const double* row = W + static_cast<std::size_t>(j) * n;
    double s = B[j];
    for (std::size_t i = 0; i < n; ++i) s += row[i] * in[i];
    out[j] = l.relu ? std::max(0.0, s) : s;
  }
}

void dense_backward(const LayerSpec& l, const double* p, const double* in, const double* out,
                    const double* dout, double* din, double* g) {
  const double* W = p + l.w_off;
  double* gW = g + l.w_off;
  double* gB = g + l.b_off;
  const std::size_t n = l.in_size();
  if (din) std::fill_n(din, n, 0.0);
  for (int j = 0; j < l.out_c; ++j) {
    double d = dout[j];
    if (l.relu && !(out[j] > 0.0)) d = 0.0;
    if (d == 0.0) continue;
    gB[j] += d;
    double* grow = gW + static_cast<std::size_t>(j) * n;
    const double* row = W + static_cast<std::size_t>(j) * n;
    for (std::size_t i = 0; i < n; ++i) grow[i] += d * in[i];
    if (din) {
      for (std::size_t i = 0; i < n; ++i) din[i] += d * row[i];
    }
  }
}

}  // namespace

double forward(const CNNModel& model, std::span<const double> input, Workspace& ws) {
  const std::size_t expect = static_cast<std::size_t>(model.arch.input_size) * model.arch.input_size;
  if (input.size() != expect) {
    throw ShapeMismatch("forward: input has " + std::to_string(input.size()) +
                        " values, model expects " + std::to_string(expect));
  }
  const auto& L = model.layers;
  ws.act.resize(L.size() + 1);
  ws.argmax.resize(L.size());
  ws.act[0].assign(input.begin(), input.end());
  const double* p = model.params.data();
  for (std::size_t i = 0; i < L.size(); ++i) {
    ws.act[i + 1].resize(L[i].out_size());
    switch (L[i].kind) {
      case LayerKind::kConv:
        conv_forward(L[i], p, ws.act[i].data(), ws.act[i + 1].data());
        break;
      case LayerKind::kPool:
        ws.argmax[i].resize(L[i].out_size());
        pool_forward(L[i], ws.act[i].data(), ws.act[i + 1].data(), ws.argmax[i].data());
        break;
      case LayerKind::kDense:
        dense_forward(L[i], p, ws.act[i].data(), ws.act[i + 1].data());
        break;
    }
  }
  return ws.act.back()[0];
}

double forward(const CNNModel& model, std::span<const double> input) {
  Workspace ws;
  return forward(model, input, ws);
}

void backward(const CNNModel& model, const Workspace& ws, double dout, std::span<double> grad) {
  if (grad.size() != model.params.size()) throw ShapeMismatch("backward: gradient size");
  const auto& L = model.layers;
  const double* p = model.params.data();
  std::vector<double> d{dout}, dprev;
  for (std::size_t ii = L.size(); ii-- > 0;) {
    const auto& l = L[ii];
    const bool need_in = ii > 0;
    dprev.assign(need_in ? l.in_size() : 0, 0.0);
    switch (l.kind) {
      case LayerKind::kConv:
        conv_backward(l, p, ws.act[ii].data(), ws.act[ii + 1].data(), d.data(),
                      need_in ? dprev.data() : nullptr, grad.data());
        break;
      case LayerKind::kPool:
        for (std::size_t o = 0; o < l.out_size(); ++o) dprev[ws.argmax[ii][o]] += d[o];
        break;
      case LayerKind::kDense:
        dense_backward(l, p, ws.act[ii].data(), ws.act[ii + 1].data(), d.data(),
                       need_in ? dprev.data() : nullptr, grad.data());
        break;
    }
    d.swap(dprev);
  }
}

double mape_loss(std::span<const double> pred, std::span<const double> label) {
  if (pred.size() != label.size() || pred.empty()) {
    throw ShapeMismatch("mape_loss: prediction and label counts differ or are empty");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (label[i] == 0.0) throw InvalidParameter("mape_loss: zero label");
    s += std::abs(pred[i] - label[i]) / std::abs(label[i]);
  }
  return s / pred.size();
}

double backward_gradcheck(const CNNModel& model, std::span<const double> input, double label,
                          double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw InvalidParameter("gradcheck epsilon must lie in [1e-7, 1e-3]");
  }
  if (label == 0.0) throw InvalidParameter("gradcheck: zero label");
  Workspace ws;
  const double pred = forward(model, input, ws);
  if (pred == label) throw InvalidParameter("gradcheck: prediction equals label (kink)");
  std::vector<double> g(model.num_params(), 0.0);
  const double dl = (pred > label ? 1.0 : -1.0) / std::abs(label);
  backward(model, ws, dl, g);

  CNNModel m = model;
  auto loss = [&] { return std::abs(forward(m, input) - label) / std::abs(label); };
  double worst = 0.0;
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    const double orig = m.params[i];
    m.params[i] = orig + epsilon;
    const double lp = loss();
    m.params[i] = orig - epsilon;
    const double lm = loss();
    m.params[i] = orig;
    const double num = (lp - lm) / (2.0 * epsilon);
    const double den = std::max({std::abs(g[i]), std::abs(num), 1e-7});
    worst = std::max(worst, std::abs(g[i] - num) / den);
  }
  return worst;
}

}  // namespace padist::ml
