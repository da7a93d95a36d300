#pragma once

#include <string>
#include <variant>

#include "smartmixed/grouped.hpp"
#include "smartmixed/network.hpp"

namespace smartmixed {

/// A checkpoint holds either a Phase-1 (selective) or a mixed network.
using AnyNetwork = std::variant<NetworkPhase1, NetworkMixed>;

/// File layout: one compact JSON line (format tag, version, phase,
/// architecture, activation metadata, optional config echo, tensor
/// directory) followed by the raw little-endian float64 tensor blocks in
/// directory order.
void save_checkpoint(const std::string& path, const NetworkPhase1& net,
                     const std::string& config_echo_json = "");
void save_checkpoint(const std::string& path, const NetworkMixed& net,
                     const std::string& config_echo_json = "");

/// Throws CheckpointError on any structural problem (bad tag, missing
/// tensors, truncated payload).
AnyNetwork load_checkpoint(const std::string& path);

/// FNV-1a over the raw parameter bytes of every tensor, in declared order.
std::uint64_t parameter_checksum(const NetworkPhase1& net);
std::uint64_t parameter_checksum(const NetworkMixed& net);

}  // namespace smartmixed
