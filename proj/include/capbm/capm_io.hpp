#pragma once

#include <string>
#include <variant>

#include "capbm/model.hpp"

namespace capbm {

/**
 * CAPM parameter container (all integers and doubles little-endian):
 *
 *   "CAPM" | u32 version = 1 | u8 kind
 *   kind 0 (full model):  u32 N, then modulus, phase, amp_coupling (N×N row-major), bias (N)
 *   kind 1 (restricted):  u32 V, u32 H, then weights (V×H row-major, re/im pairs),
 *                         amp_coupling (V×H row-major), visible_bias (V), hidden_bias (H)
 *
 * Values are stored as raw f64 bit patterns so a save/load round trip is exact.
 */
inline constexpr std::uint32_t capm_version = 1;

enum class ModelKind : std::uint8_t { full = 0, restricted = 1 };

using AnyParams = std::variant<CapBmParams, CapRbmParams>;

void save_params(const std::string& path, const CapBmParams& params);
void save_params(const std::string& path, const CapRbmParams& params);

AnyParams load_params(const std::string& path);
/// Load and require a restricted model; FormatError otherwise.
CapRbmParams load_rbm(const std::string& path);

std::vector<unsigned char> encode_params(const AnyParams& params);
AnyParams decode_params(const std::vector<unsigned char>& bytes);

}  // namespace capbm
