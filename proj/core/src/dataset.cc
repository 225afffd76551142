#include "padist/dataset.h"

#include <cmath>
#include <sstream>

#include "padist/container.h"
#include "padist/csv.h"
#include "padist/error.h"
#include "padist/feature.h"
#include "padist/parallel.h"
#include "padist/random.h"
#include "padist/rxmetrics.h"

namespace padist::ml {

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw InvalidParameter("unknown split '" + s + "'");
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == s) out.push_back(i);
  }
  return out;
}

void Dataset::validate() const {
  if (input_size < 1) throw InvalidParameter("dataset input size must be >= 1");
  const std::size_t n = static_cast<std::size_t>(input_size) * input_size;
  for (const auto& r : records) {
    if (r.features.size() != n) throw ShapeMismatch("dataset record has wrong feature count");
    if (!std::isfinite(r.label_db)) throw InvalidParameter("dataset label is not finite");
  }
}

std::vector<std::size_t> permutation(std::size_t n, uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  Engine eng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(i));
    std::swap(p[i - 1], p[std::min(j, i - 1)]);
  }
  return p;
}

namespace {

struct Slot {
  bool ok = false;
  Record rec;
  std::string error;
};

}  // namespace

Dataset build_dataset(const DatasetSpec& spec, BuildReport* report) {
  spec.scenario.validate();
  if (spec.ibo_db.empty()) throw InvalidParameter("build_dataset: empty IBO list");
  if (spec.link.ofdm.num_used() != spec.scenario.n_u) {
    throw ShapeMismatch("build_dataset: OFDM config uses " +
                        std::to_string(spec.link.ofdm.num_used()) +
                        " subcarriers, scenario has " + std::to_string(spec.scenario.n_u));
  }
  const int nue = spec.scenario.num_ues();
  const std::size_t nibo = spec.ibo_db.size();

  // One task per UE; the channel is shared by that UE's IBOs.
  auto per_ue = parallel_map(static_cast<std::size_t>(nue), spec.threads, [&](std::size_t u) {
    std::vector<Slot> slots(nibo);
    channel::ChannelMatrix H;
    try {
      H = channel::ue_channel(spec.scenario, static_cast<int>(u), spec.seed);
    } catch (const Error& e) {
      for (auto& s : slots) s.error = std::string("channel: ") + e.what();
      return slots;
    }
    for (std::size_t j = 0; j < nibo; ++j) {
      auto& s = slots[j];
      try {
        link::LinkConfig cfg = spec.link;
        cfg.gamma_avg = rx::from_db(spec.ibo_db[j]);
        const auto res = link::simulate_link(H, cfg, derive_seed(spec.seed, "link", u));
        const double label = rx::to_db(res.sdr_scheduled());
        if (!std::isfinite(label) || std::abs(label) < kLabelGuardDb) {
          s.error = "label " + csv::fmt_double(label) + " dB fails the |SDR| >= 1 dB guard";
          continue;
        }
        s.rec.features = feature_matrix(H, cfg.gamma_avg).flatten();
        s.rec.label_db = label;
        s.rec.gamma_db = spec.ibo_db[j];
        s.rec.ue_id = static_cast<int>(u);
        s.rec.split = spec.split;
        s.ok = true;
      } catch (const Error& e) {
        s.error = e.what();
      }
    }
    return slots;
  });

  Dataset ds;
  ds.input_size = spec.scenario.geometry.num_antennas();
  if (report) *report = {};
  for (int u = 0; u < nue; ++u) {
    for (std::size_t j = 0; j < nibo; ++j) {
      auto& s = per_ue[u][j];
      if (report) ++report->attempted;
      if (s.ok) {
        ds.records.push_back(std::move(s.rec));
      } else if (report) {
        report->skipped.push_back("ue " + std::to_string(u) + " ibo " +
                                  csv::fmt_double(spec.ibo_db[j]) + " dB: " + s.error);
      }
    }
  }
  return ds;
}

void split_train_val(Dataset& ds, double val_fraction, uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InvalidParameter("validation fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (ds.records[i].split != Split::kTest) pool.push_back(i);
  }
  const auto perm = permutation(pool.size(), derive_seed(seed, "split", 0));
  const auto nval = static_cast<std::size_t>(std::llround(val_fraction * pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ds.records[pool[perm[i]]].split = i < nval ? Split::kVal : Split::kTrain;
  }
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
  ds.validate();
  os << "# padist-dataset v1 k=" << ds.input_size << "\n";
  csv::Writer w(os);
  std::vector<std::string> cols{"ue_id", "gamma_db", "label_db", "split"};
  const std::size_t nf = static_cast<std::size_t>(ds.input_size) * ds.input_size;
  for (std::size_t i = 0; i < nf; ++i) cols.push_back("f" + std::to_string(i));
  w.header(cols);
  for (const auto& r : ds.records) {
    w.cell(r.ue_id).cell(r.gamma_db).cell(r.label_db).cell(to_string(r.split));
    for (double v : r.features) w.cell(v);
    w.end_row();
  }
}

Dataset read_dataset_csv(std::istream& is) {
  const csv::Table t = csv::read(is);
  Dataset ds;
  for (const auto& c : t.comments) {
    const auto pos = c.find("k=");
    if (c.find("padist-dataset") != std::string::npos && pos != std::string::npos) {
      ds.input_size = std::stoi(c.substr(pos + 2));
    }
  }
  if (ds.input_size < 1) throw IoError("dataset CSV lacks a '# padist-dataset v1 k=..' line");
  const std::size_t nf = static_cast<std::size_t>(ds.input_size) * ds.input_size;
  if (t.columns.size() != 4 + nf) {
    throw IoError("dataset CSV has " + std::to_string(t.columns.size()) + " columns, expected " +
                  std::to_string(4 + nf));
  }
  const int cu = t.column("ue_id"), cg = t.column("gamma_db"), cl = t.column("label_db"),
            cs = t.column("split");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Record rec;
    rec.ue_id = static_cast<int>(t.number(r, cu));
    rec.gamma_db = t.number(r, cg);
    rec.label_db = t.number(r, cl);
    rec.split = split_from_string(t.rows[r][cs]);
    rec.features.resize(nf);
    for (std::size_t i = 0; i < nf; ++i) rec.features[i] = t.number(r, static_cast<int>(4 + i));
    ds.records.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

void write_dataset_binary(std::ostream& os, const Dataset& ds) {
  ds.validate();
  const std::size_t nf = static_cast<std::size_t>(ds.input_size) * ds.input_size;
  io::ContainerHeader h;
  h.kind = io::PayloadKind::kDataset;
  h.dims = {ds.records.size(), 4 + nf};
  h.scalars = {static_cast<double>(ds.input_size)};
  h.tag = "dataset";
  std::vector<double> payload;
  payload.reserve(ds.records.size() * (4 + nf));
  for (const auto& r : ds.records) {
    payload.push_back(r.ue_id);
    payload.push_back(r.gamma_db);
    payload.push_back(r.label_db);
    payload.push_back(static_cast<double>(r.split));
    payload.insert(payload.end(), r.features.begin(), r.features.end());
  }
  io::write_container(os, h, payload);
}

Dataset read_dataset_binary(std::istream& is) {
  std::vector<double> payload;
  const auto h = io::read_container(is, &payload);
  if (h.kind != io::PayloadKind::kDataset || h.dims.size() != 2 || h.scalars.size() != 1) {
    throw IoError("container does not hold a dataset");
  }
  Dataset ds;
  ds.input_size = static_cast<int>(h.scalars[0]);
  const std::size_t nf = static_cast<std::size_t>(ds.input_size) * ds.input_size;
  if (h.dims[1] != 4 + nf) throw IoError("dataset container row width does not match k");
  for (std::size_t r = 0; r < h.dims[0]; ++r) {
    const double* row = payload.data() + r * (4 + nf);
    Record rec;
    rec.ue_id = static_cast<int>(row[0]);
    rec.gamma_db = row[1];
    rec.label_db = row[2];
    const int sp = static_cast<int>(row[3]);
    if (sp < 0 || sp > 2) throw IoError("dataset container has an invalid split tag");
    rec.split = static_cast<Split>(sp);
    rec.features.assign(row + 4, row + 4 + nf);
    ds.records.push_back(std::move(rec));
  }
  ds.validate();
  return ds;
}

}  // namespace padist::ml
