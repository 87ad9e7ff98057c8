#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "posittrain/posit.hpp"

namespace posittrain {

enum class FormatKind : std::uint8_t { Posit, Binary16, Binary32 };

/// Storage/arithmetic format of a tensor or network. Fixed for its lifetime.
class NumericFormat {
public:
    static NumericFormat posit(PositConfig cfg) { return NumericFormat(FormatKind::Posit, cfg); }
    static NumericFormat posit(int n, int es) { return posit(PositConfig(n, es)); }
    static NumericFormat binary16() { return NumericFormat(FormatKind::Binary16, std::nullopt); }
    static NumericFormat binary32() { return NumericFormat(FormatKind::Binary32, std::nullopt); }

    /// Default es: 1 for 16-bit posits, 2 for 32-bit, 0 below 16.
    static int default_es(int bits);
    /// From the CLI vocabulary: family "posit"|"float", width 16|32 (posits
    /// accept 2..32), optional es override.
    static NumericFormat from_cli(const std::string& family, int bits, std::optional<int> es = std::nullopt);
    /// Inverse of name(); throws std::invalid_argument.
    static NumericFormat parse(const std::string& name);

    FormatKind kind() const { return kind_; }
    bool is_posit() const { return kind_ == FormatKind::Posit; }
    const PositConfig& posit_config() const;
    int bits() const;

    /// Machine name, e.g. "posit16_es1", "binary16", "binary32".
    std::string name() const;
    /// Table label, e.g. "Posit-16", "Float-32".
    std::string label() const;

    friend bool operator==(const NumericFormat&, const NumericFormat&) = default;

private:
    NumericFormat(FormatKind kind, std::optional<PositConfig> cfg) : kind_(kind), posit_(cfg) {}

    FormatKind kind_;
    std::optional<PositConfig> posit_;
};

}  // namespace posittrain
