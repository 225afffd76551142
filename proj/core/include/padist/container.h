#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "padist/channel.h"

namespace padist::io {

// Binary container shared by channels, waveforms and datasets.
//
//   offset  size      field
//   0       4         magic "PDST"
//   4       1         version (1)
//   5       1         payload kind
//   6       2         reserved, zero
//   8       4         ndims (u32)
//   12      8*ndims   dims (u64)
//   ...     4         nscalars (u32), then nscalars f64
//   ...     4         tag length (u32), then tag bytes (UTF-8)
//   ...     8*prod    payload, f64
//
// All integers and floats are little-endian. Complex payloads carry a
// trailing dimension of 2 (re, im).
inline constexpr char kMagic[4] = {'P', 'D', 'S', 'T'};
inline constexpr uint8_t kVersion = 1;

enum class PayloadKind : uint8_t {
  kChannel = 1,   // dims {N_U, K, 2}, scalars {beta, x, y, z}
  kWaveform = 2,  // dims {K, N + N_CP, 2}
  kDataset = 3,   // dims {records, 4 + K*K}
  kWeights = 4,   // dims {num_params}
};

struct ContainerHeader {
  PayloadKind kind = PayloadKind::kChannel;
  std::vector<uint64_t> dims;
  std::vector<double> scalars;
  std::string tag;

  uint64_t payload_size() const;
};

void write_container(std::ostream& os, const ContainerHeader& header,
                     std::span<const double> payload);
// Reads and validates magic, version and payload length.
ContainerHeader read_container(std::istream& is, std::vector<double>* payload);

void write_channel_binary(std::ostream& os, const channel::ChannelMatrix& ch);
channel::ChannelMatrix read_channel_binary(std::istream& is);

// CSV layout:
//   # padist-channel v1 model=<tag> beta=<beta> n_u=<N_U> k=<K>
//   n,k,re,im
//   one row per (n, k), n-major.
void write_channel_csv(std::ostream& os, const channel::ChannelMatrix& ch);
channel::ChannelMatrix read_channel_csv(std::istream& is);

}  // namespace padist::io
