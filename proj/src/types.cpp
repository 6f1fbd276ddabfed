#include "physio/types.hpp"

#include "physio/errors.hpp"

namespace physio {

namespace {
constexpr std::array<std::string_view, kNumChannels> kFileNames = {
    "ACC_X", "ACC_Y", "ACC_Z", "BVP", "EDA", "HR", "TEMP"};
constexpr std::array<std::string_view, kNumChannels> kFolderNames = {
    "acc_x", "acc_y", "acc_z", "bvp", "eda", "hr", "temp"};
constexpr std::array<double, kNumChannels> kRates = {32.0, 32.0, 32.0, 64.0, 4.0, 1.0, 4.0};
constexpr std::array<std::string_view, kNumClasses> kClassNames = {"LL", "L", "H", "HH"};
constexpr std::array<std::string_view, 4> kSplitNames = {"train", "val", "test", "unassigned"};
}  // namespace

std::string_view file_name(Channel c) { return kFileNames[index(c)]; }
std::string_view folder_name(Channel c) { return kFolderNames[index(c)]; }
double native_rate(Channel c) { return kRates[index(c)]; }
std::string_view name(Awareness a) { return kClassNames[index(a)]; }
std::string_view name(Split s) { return kSplitNames[static_cast<std::size_t>(s)]; }

Channel parse_channel(std::string_view s) {
  for (Channel c : kAllChannels) {
    if (s == file_name(c) || s == folder_name(c)) return c;
  }
  throw ParseError("unknown channel '" + std::string(s) + "'");
}

Awareness parse_awareness(std::string_view s) {
  for (Awareness a : kAllClasses) {
    if (s == name(a)) return a;
  }
  throw ParseError("unknown awareness label '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
    if (s == kSplitNames[i]) return static_cast<Split>(i);
  }
  throw ParseError("unknown split '" + std::string(s) + "'");
}

}  // namespace physio
