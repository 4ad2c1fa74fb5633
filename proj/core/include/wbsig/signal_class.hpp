#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace wbsig {

/// The 53 signal classes. Enumerator values are the dataset class indices.
enum class SignalClass : std::uint8_t {
  OOK = 0, BPSK = 1, PAM4 = 2, ASK4 = 3, QPSK = 4, PAM8 = 5, ASK8 = 6, PSK8 = 7,
  QAM16 = 8, PAM16 = 9, ASK16 = 10, PSK16 = 11, QAM32 = 12, QAM32Cross = 13,
  PAM32 = 14, ASK32 = 15, PSK32 = 16, QAM64 = 17, PAM64 = 18, ASK64 = 19, PSK64 = 20,
  QAM128Cross = 21, QAM256 = 22, QAM512Cross = 23, QAM1024 = 24,
  FSK2 = 25, GFSK2 = 26, MSK2 = 27, GMSK2 = 28,
  FSK4 = 29, GFSK4 = 30, MSK4 = 31, GMSK4 = 32,
  FSK8 = 33, GFSK8 = 34, MSK8 = 35, GMSK8 = 36,
  FSK16 = 37, GFSK16 = 38, MSK16 = 39, GMSK16 = 40,
  OFDM64 = 41, OFDM72 = 42, OFDM128 = 43, OFDM180 = 44, OFDM256 = 45, OFDM300 = 46,
  OFDM512 = 47, OFDM600 = 48, OFDM900 = 49, OFDM1024 = 50, OFDM1200 = 51, OFDM2048 = 52,
};

inline constexpr std::size_t kNumClasses = 53;

/// Modulation families, in the fixed alphabetical order used for the
/// six-way label granularity.
enum class ModFamily : std::uint8_t { ASK = 0, FSK = 1, OFDM = 2, PAM = 3, PSK = 4, QAM = 5 };

inline constexpr std::size_t kNumFamilies = 6;

inline constexpr std::array<ModFamily, kNumFamilies> kAllFamilies = {
    ModFamily::ASK, ModFamily::FSK, ModFamily::OFDM, ModFamily::PAM, ModFamily::PSK, ModFamily::QAM};

ModFamily class_to_family(SignalClass c);

std::string_view class_name(SignalClass c);
std::string_view family_name(ModFamily f);

std::optional<SignalClass> class_from_name(std::string_view name);
/// Throws ParameterError for indices outside 0..52.
SignalClass class_from_index(int index);
std::optional<ModFamily> family_from_name(std::string_view name);

constexpr int class_index(SignalClass c) { return static_cast<int>(c); }
constexpr int family_index(ModFamily f) { return static_cast<int>(f); }

/// Constellation order for ASK/PAM/PSK/QAM classes, tone count for FSK
/// classes, subcarrier count for OFDM classes.
int class_order(SignalClass c);

/// All classes belonging to a family, ascending by index.
std::span<const SignalClass> classes_in_family(ModFamily f);

}  // namespace wbsig
