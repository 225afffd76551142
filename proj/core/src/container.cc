#include "padist/container.h"

#include <bit>
#include <cstring>
#include <sstream>

#include "padist/csv.h"
#include "padist/error.h"

namespace padist::io {

namespace {

constexpr uint64_t kMaxElements = uint64_t{1} << 34;

template <typename T>
void put_le(std::ostream& os, T v) {
  using U = std::conditional_t<sizeof(T) == 8, uint64_t,
                               std::conditional_t<sizeof(T) == 4, uint32_t,
                                                  std::conditional_t<sizeof(T) == 2, uint16_t, uint8_t>>>;
  const U u = std::bit_cast<U>(v);
  char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  os.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, uint64_t,
                               std::conditional_t<sizeof(T) == 4, uint32_t,
                                                  std::conditional_t<sizeof(T) == 2, uint16_t, uint8_t>>>;
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw IoError("container truncated");
  }
  U u = 0;
  for (size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(buf[i]) << (8 * i);
  return std::bit_cast<T>(u);
}

}  // namespace

uint64_t ContainerHeader::payload_size() const {
  uint64_t n = 1;
  for (uint64_t d : dims) {
    if (d != 0 && n > kMaxElements / d) throw IoError("container dims overflow");
    n *= d;
  }
  return dims.empty() ? 0 : n;
}

void write_container(std::ostream& os, const ContainerHeader& header,
                     std::span<const double> payload) {
  if (payload.size() != header.payload_size()) {
    throw ShapeMismatch("container payload does not match dims");
  }
  os.write(kMagic, 4);
  put_le<uint8_t>(os, kVersion);
  put_le<uint8_t>(os, static_cast<uint8_t>(header.kind));
  put_le<uint16_t>(os, 0);
  put_le<uint32_t>(os, static_cast<uint32_t>(header.dims.size()));
  for (uint64_t d : header.dims) put_le<uint64_t>(os, d);
  put_le<uint32_t>(os, static_cast<uint32_t>(header.scalars.size()));
  for (double s : header.scalars) put_le<double>(os, s);
  put_le<uint32_t>(os, static_cast<uint32_t>(header.tag.size()));
  os.write(header.tag.data(), static_cast<std::streamsize>(header.tag.size()));
  for (double v : payload) put_le<double>(os, v);
  if (!os) throw IoError("container write failed");
}

ContainerHeader read_container(std::istream& is, std::vector<double>* payload) {
  char magic[4];
  if (!is.read(magic, 4)) throw IoError("container truncated");
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("bad container magic");
  const auto version = get_le<uint8_t>(is);
  if (version != kVersion) {
    throw IoError("unsupported container version " + std::to_string(version));
  }
  ContainerHeader h;
  const auto kind = get_le<uint8_t>(is);
  if (kind < 1 || kind > 4) throw IoError("unknown container payload kind");
  h.kind = static_cast<PayloadKind>(kind);
  get_le<uint16_t>(is);
  const auto ndims = get_le<uint32_t>(is);
  if (ndims > 8) throw IoError("container has too many dims");
  h.dims.resize(ndims);
  for (auto& d : h.dims) d = get_le<uint64_t>(is);
  const auto nscalars = get_le<uint32_t>(is);
  if (nscalars > 1024) throw IoError("container has too many scalars");
  h.scalars.resize(nscalars);
  for (auto& s : h.scalars) s = get_le<double>(is);
  const auto tag_len = get_le<uint32_t>(is);
  if (tag_len > 4096) throw IoError("container tag too long");
  h.tag.resize(tag_len);
  if (tag_len > 0 && !is.read(h.tag.data(), tag_len)) throw IoError("container truncated");
  const uint64_t n = h.payload_size();
  if (payload) {
    payload->resize(n);
    for (auto& v : *payload) v = get_le<double>(is);
  }
  return h;
}

void write_channel_binary(std::ostream& os, const channel::ChannelMatrix& ch) {
  ContainerHeader h;
  h.kind = PayloadKind::kChannel;
  h.dims = {static_cast<uint64_t>(ch.H.rows()), static_cast<uint64_t>(ch.H.cols()), 2};
  h.scalars = {ch.beta, ch.meta.position[0], ch.meta.position[1], ch.meta.position[2]};
  h.tag = channel::to_string(ch.meta.model);
  std::vector<double> payload;
  payload.reserve(ch.H.size() * 2);
  for (Eigen::Index n = 0; n < ch.H.rows(); ++n) {
    for (Eigen::Index k = 0; k < ch.H.cols(); ++k) {
      payload.push_back(ch.H(n, k).real());
      payload.push_back(ch.H(n, k).imag());
    }
  }
  write_container(os, h, payload);
}

channel::ChannelMatrix read_channel_binary(std::istream& is) {
  std::vector<double> payload;
  const ContainerHeader h = read_container(is, &payload);
  if (h.kind != PayloadKind::kChannel || h.dims.size() != 3 || h.dims[2] != 2 ||
      h.scalars.size() != 4) {
    throw IoError("container does not hold a channel matrix");
  }
  channel::ChannelMatrix ch;
  ch.beta = h.scalars[0];
  ch.meta.position = {h.scalars[1], h.scalars[2], h.scalars[3]};
  ch.meta.model = channel::channel_model_from_string(h.tag);
  ch.H.resize(static_cast<Eigen::Index>(h.dims[0]), static_cast<Eigen::Index>(h.dims[1]));
  size_t i = 0;
  for (Eigen::Index n = 0; n < ch.H.rows(); ++n) {
    for (Eigen::Index k = 0; k < ch.H.cols(); ++k, i += 2) {
      ch.H(n, k) = {payload[i], payload[i + 1]};
    }
  }
  return ch;
}

void write_channel_csv(std::ostream& os, const channel::ChannelMatrix& ch) {
  os << "# padist-channel v1 model=" << channel::to_string(ch.meta.model)
     << " beta=" << csv::fmt_double(ch.beta) << " n_u=" << ch.H.rows()
     << " k=" << ch.H.cols() << '\n';
  csv::Writer w(os);
  w.header({"n", "k", "re", "im"});
  for (Eigen::Index n = 0; n < ch.H.rows(); ++n) {
    for (Eigen::Index k = 0; k < ch.H.cols(); ++k) {
      w.cell(static_cast<long long>(n)).cell(static_cast<long long>(k));
      w.cell(ch.H(n, k).real()).cell(ch.H(n, k).imag());
      w.end_row();
    }
  }
}

channel::ChannelMatrix read_channel_csv(std::istream& is) {
  const csv::Table t = csv::read(is);
  if (t.comments.empty()) throw IoError("channel CSV lacks its header comment");
  std::istringstream meta(t.comments.front());
  std::string word, model = "external";
  double beta = 0.0;
  long n_u = -1, k = -1;
  while (meta >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = word.substr(0, eq), val = word.substr(eq + 1);
    if (key == "model") model = val;
    else if (key == "beta") beta = std::stod(val);
    else if (key == "n_u") n_u = std::stol(val);
    else if (key == "k") k = std::stol(val);
  }
  if (n_u <= 0 || k <= 0) throw IoError("channel CSV header lacks n_u / k");
  if (t.size() != static_cast<size_t>(n_u * k)) {
    throw IoError("channel CSV row count does not match n_u * k");
  }
  channel::ChannelMatrix ch;
  ch.beta = beta;
  ch.meta.model = channel::channel_model_from_string(model);
  ch.H.resize(n_u, k);
  const int cn = t.column("n"), ck = t.column("k"), cre = t.column("re"),
            cim = t.column("im");
  for (size_t row = 0; row < t.size(); ++row) {
    const long n = static_cast<long>(t.number(row, cn));
    const long kk = static_cast<long>(t.number(row, ck));
    if (n < 0 || n >= n_u || kk < 0 || kk >= k) throw IoError("channel CSV index out of range");
    ch.H(n, kk) = {t.number(row, cre), t.number(row, cim)};
  }
  return ch;
}

}  // namespace padist::io
