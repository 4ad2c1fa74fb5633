#include "wbsig/signal_class.hpp"

#include <cctype>
#include <string>
#include <vector>

#include "wbsig/error.hpp"

namespace wbsig {
namespace {

struct ClassInfo {
  std::string_view name;
  ModFamily family;
  int order;
};

constexpr std::array<ClassInfo, kNumClasses> kClassTable = {{
    {"ook", ModFamily::PAM, 2},
    {"bpsk", ModFamily::PSK, 2},
    {"4pam", ModFamily::PAM, 4},
    {"4ask", ModFamily::ASK, 4},
    {"qpsk", ModFamily::PSK, 4},
    {"8pam", ModFamily::PAM, 8},
    {"8ask", ModFamily::ASK, 8},
    {"8psk", ModFamily::PSK, 8},
    {"16qam", ModFamily::QAM, 16},
    {"16pam", ModFamily::PAM, 16},
    {"16ask", ModFamily::ASK, 16},
    {"16psk", ModFamily::PSK, 16},
    {"32qam", ModFamily::QAM, 32},
    {"32qam_cross", ModFamily::QAM, 32},
    {"32pam", ModFamily::PAM, 32},
    {"32ask", ModFamily::ASK, 32},
    {"32psk", ModFamily::PSK, 32},
    {"64qam", ModFamily::QAM, 64},
    {"64pam", ModFamily::PAM, 64},
    {"64ask", ModFamily::ASK, 64},
    {"64psk", ModFamily::PSK, 64},
    {"128qam_cross", ModFamily::QAM, 128},
    {"256qam", ModFamily::QAM, 256},
    {"512qam_cross", ModFamily::QAM, 512},
    {"1024qam", ModFamily::QAM, 1024},
    {"2fsk", ModFamily::FSK, 2},
    {"2gfsk", ModFamily::FSK, 2},
    {"2msk", ModFamily::FSK, 2},
    {"2gmsk", ModFamily::FSK, 2},
    {"4fsk", ModFamily::FSK, 4},
    {"4gfsk", ModFamily::FSK, 4},
    {"4msk", ModFamily::FSK, 4},
    {"4gmsk", ModFamily::FSK, 4},
    {"8fsk", ModFamily::FSK, 8},
    {"8gfsk", ModFamily::FSK, 8},
    {"8msk", ModFamily::FSK, 8},
    {"8gmsk", ModFamily::FSK, 8},
    {"16fsk", ModFamily::FSK, 16},
    {"16gfsk", ModFamily::FSK, 16},
    {"16msk", ModFamily::FSK, 16},
    {"16gmsk", ModFamily::FSK, 16},
    {"ofdm-64", ModFamily::OFDM, 64},
    {"ofdm-72", ModFamily::OFDM, 72},
    {"ofdm-128", ModFamily::OFDM, 128},
    {"ofdm-180", ModFamily::OFDM, 180},
    {"ofdm-256", ModFamily::OFDM, 256},
    {"ofdm-300", ModFamily::OFDM, 300},
    {"ofdm-512", ModFamily::OFDM, 512},
    {"ofdm-600", ModFamily::OFDM, 600},
    {"ofdm-900", ModFamily::OFDM, 900},
    {"ofdm-1024", ModFamily::OFDM, 1024},
    {"ofdm-1200", ModFamily::OFDM, 1200},
    {"ofdm-2048", ModFamily::OFDM, 2048},
}};

constexpr std::array<std::string_view, kNumFamilies> kFamilyNames = {"ask", "fsk", "ofdm",
                                                                    "pam", "psk", "qam"};

const std::array<std::vector<SignalClass>, kNumFamilies>& family_members() {
  static const auto members = [] {
    std::array<std::vector<SignalClass>, kNumFamilies> out;
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      out[static_cast<std::size_t>(kClassTable[i].family)].push_back(static_cast<SignalClass>(i));
    }
    return out;
  }();
  return members;
}

const ClassInfo& info(SignalClass c) {
  const auto i = static_cast<std::size_t>(c);
  detail::require(i < kNumClasses, "invalid signal class");
  return kClassTable[i];
}

}  // namespace

ModFamily class_to_family(SignalClass c) { return info(c).family; }
std::string_view class_name(SignalClass c) { return info(c).name; }
int class_order(SignalClass c) { return info(c).order; }

std::string_view family_name(ModFamily f) {
  const auto i = static_cast<std::size_t>(f);
  detail::require(i < kNumFamilies, "invalid modulation family");
  return kFamilyNames[i];
}

std::optional<SignalClass> class_from_name(std::string_view name) {
  std::string lowered(name);
  for (auto& ch : lowered) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kClassTable[i].name == lowered) return static_cast<SignalClass>(i);
  }
  return std::nullopt;
}

SignalClass class_from_index(int index) {
  detail::require(index >= 0 && index < static_cast<int>(kNumClasses),
                  "class index out of range: " + std::to_string(index));
  return static_cast<SignalClass>(index);
}

std::optional<ModFamily> family_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumFamilies; ++i) {
    if (kFamilyNames[i] == name) return static_cast<ModFamily>(i);
  }
  return std::nullopt;
}

std::span<const SignalClass> classes_in_family(ModFamily f) {
  return family_members()[static_cast<std::size_t>(f)];
}

}  // namespace wbsig
