#include "padist/prune.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "padist/error.h"

namespace padist::ml {

namespace {

struct Item {
  double score;
  std::size_t order;
  int layer;           // index into model.layers
  std::size_t index;   // filter index (conv) or parameter index (dense)
  bool filter;
};

// Zeroes a parameter, counting it if it was nonzero.
std::size_t zero(std::vector<double>& p, std::size_t i) {
  if (p[i] == 0.0) return 0;
  p[i] = 0.0;
  return 1;
}

std::size_t remove_filter(CNNModel& m, int li, int o) {
  const LayerSpec& l = m.layers[li];
  std::size_t n = 0;
  const std::size_t per = static_cast<std::size_t>(l.in_c) * 9;
  for (std::size_t i = 0; i < per; ++i) n += zero(m.params, l.w_off + o * per + i);
  n += zero(m.params, l.b_off + o);
  // Next parametrized layer reads channel o.
  std::size_t j = li + 1;
  int h = l.out_h, w = l.out_w;
  while (j < m.layers.size() && m.layers[j].kind == LayerKind::kPool) {
    h = m.layers[j].out_h;
    w = m.layers[j].out_w;
    ++j;
  }
  if (j >= m.layers.size()) return n;
  const LayerSpec& nx = m.layers[j];
  if (nx.kind == LayerKind::kConv) {
    for (int oo = 0; oo < nx.out_c; ++oo) {
      for (int k = 0; k < 9; ++k) {
        n += zero(m.params, nx.w_off + (static_cast<std::size_t>(oo) * nx.in_c + o) * 9 + k);
      }
    }
  } else {
    const std::size_t in = nx.in_size();
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int oo = 0; oo < nx.out_c; ++oo) {
      for (std::size_t f = 0; f < plane; ++f) {
        n += zero(m.params, nx.w_off + oo * in + o * plane + f);
      }
    }
  }
  return n;
}

}  // namespace

CNNModel prune_magnitude(const CNNModel& model, double sparsity, PruneReport* report) {
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw InvalidParameter("pruning sparsity must lie in [0, 1)");
  }
  model.validate();
  CNNModel out = model;
  PruneReport rep;
  rep.total_params = model.num_params();
  rep.nonzero_before = model.num_nonzero();
  for (const auto& l : model.layers) {
    if (l.kind == LayerKind::kConv) rep.filters_removed.push_back(0);
  }
  const auto keep = static_cast<std::size_t>(
      std::llround((1.0 - sparsity) * static_cast<double>(rep.total_params)));
  const std::size_t target =
      rep.nonzero_before > keep ? rep.nonzero_before - keep : 0;

  std::vector<Item> items;
  std::size_t order = 0;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const auto& l = model.layers[li];
    if (l.kind == LayerKind::kConv) {
      const std::size_t per = static_cast<std::size_t>(l.in_c) * 9;
      for (int o = 0; o < l.out_c; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < per; ++i) s += std::abs(model.params[l.w_off + o * per + i]);
        items.push_back({s / per, order++, static_cast<int>(li), static_cast<std::size_t>(o), true});
      }
    } else if (l.kind == LayerKind::kDense) {
      for (std::size_t i = 0; i < l.w_count; ++i) {
        items.push_back({std::abs(model.params[l.w_off + i]), order++, static_cast<int>(li),
                         l.w_off + i, false});
      }
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.score != b.score ? a.score < b.score : a.order < b.order;
  });

  std::vector<int> alive;
  std::vector<int> conv_slot(model.layers.size(), -1);
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    if (model.layers[li].kind == LayerKind::kConv) {
      conv_slot[li] = static_cast<int>(alive.size());
      alive.push_back(model.layers[li].out_c);
    }
  }

  std::size_t removed = 0;
  for (const Item& it : items) {
    if (removed >= target) break;
    if (it.filter) {
      const int slot = conv_slot[it.layer];
      if (alive[slot] <= 1) continue;
      removed += remove_filter(out, it.layer, static_cast<int>(it.index));
      --alive[slot];
      ++rep.filters_removed[slot];
    } else {
      const std::size_t n = zero(out.params, it.index);
      removed += n;
      rep.connections_removed += n;
    }
  }
  if (removed < target) {
    throw InvalidParameter("pruning to sparsity " + std::to_string(sparsity) +
                           " would remove every filter or connection of a layer");
  }
  for (std::size_t li = 0; li < out.layers.size(); ++li) {
    const auto& l = out.layers[li];
    if (l.kind != LayerKind::kDense) continue;
    bool any = false;
    for (std::size_t i = 0; i < l.w_count && !any; ++i) any = out.params[l.w_off + i] != 0.0;
    if (!any) {
      throw InvalidParameter("pruning removed every connection of dense layer " +
                             std::to_string(li));
    }
  }
  rep.nonzero_after = out.num_nonzero();
  if (report) *report = rep;
  return out;
}

}  // namespace padist::ml
