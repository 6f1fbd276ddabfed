#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace physio {

/// The seven wearable streams, in the fixed multimodal concatenation order.
enum class Channel : std::uint8_t { AccX = 0, AccY, AccZ, Bvp, Eda, Hr, Temp };

inline constexpr std::size_t kNumChannels = 7;
inline constexpr std::array<Channel, kNumChannels> kAllChannels = {
    Channel::AccX, Channel::AccY, Channel::AccZ, Channel::Bvp,
    Channel::Eda,  Channel::Hr,   Channel::Temp};

/// Four-level awareness state. Lower index = lower awareness; tie-breaks go
/// toward the lower index.
enum class Awareness : std::uint8_t { LL = 0, L, H, HH };

inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::array<Awareness, kNumClasses> kAllClasses = {
    Awareness::LL, Awareness::L, Awareness::H, Awareness::HH};

enum class Split : std::uint8_t { Train = 0, Val, Test, Unassigned };

inline constexpr std::size_t index(Channel c) { return static_cast<std::size_t>(c); }
inline constexpr std::size_t index(Awareness a) { return static_cast<std::size_t>(a); }

/// Upper-case name used for session CSV files ("ACC_X").
std::string_view file_name(Channel c);
/// Lower-case name used for dataset folders ("acc_x").
std::string_view folder_name(Channel c);
/// Native device rate in Hz.
double native_rate(Channel c);

std::string_view name(Awareness a);
std::string_view name(Split s);

/// Parse helpers; throw ParseError on unknown names.
Channel parse_channel(std::string_view s);
Awareness parse_awareness(std::string_view s);
Split parse_split(std::string_view s);

}  // namespace physio
