#include "posittrain/arith.hpp"

#include <mutex>
#include <stdexcept>

namespace posittrain {

int NumericFormat::default_es(int bits) {
    if (bits >= 32) return 2;
    if (bits >= 16) return 1;
    return 0;
}

NumericFormat NumericFormat::from_cli(const std::string& family, int bits, std::optional<int> es) {
    if (family == "posit") return posit(bits, es.value_or(default_es(bits)));
    if (family == "float") {
        if (es) throw std::invalid_argument("--es applies to posit formats only");
        if (bits == 16) return binary16();
        if (bits == 32) return binary32();
        throw std::invalid_argument("float format supports 16 or 32 bits");
    }
    throw std::invalid_argument("unknown format family '" + family + "' (expected posit or float)");
}

NumericFormat NumericFormat::parse(const std::string& name) {
    if (name == "binary16") return binary16();
    if (name == "binary32") return binary32();
    int n = 0;
    int es = 0;
    if (std::sscanf(name.c_str(), "posit%d_es%d", &n, &es) == 2 &&
        name == "posit" + std::to_string(n) + "_es" + std::to_string(es))
        return posit(n, es);
    throw std::invalid_argument("unknown numeric format '" + name + "'");
}

const PositConfig& NumericFormat::posit_config() const {
    if (!posit_) throw std::logic_error(name() + " is not a posit format");
    return *posit_;
}

int NumericFormat::bits() const {
    switch (kind_) {
        case FormatKind::Posit: return posit_->n();
        case FormatKind::Binary16: return 16;
        case FormatKind::Binary32: break;
    }
    return 32;
}

std::string NumericFormat::name() const {
    switch (kind_) {
        case FormatKind::Posit:
            return "posit" + std::to_string(posit_->n()) + "_es" + std::to_string(posit_->es());
        case FormatKind::Binary16: return "binary16";
        case FormatKind::Binary32: break;
    }
    return "binary32";
}

std::string NumericFormat::label() const {
    if (kind_ == FormatKind::Posit) {
        std::string l = "Posit-" + std::to_string(posit_->n());
        if (posit_->es() != default_es(posit_->n())) l += " (es=" + std::to_string(posit_->es()) + ")";
        return l;
    }
    return "Float-" + std::to_string(bits());
}

PositArith::PositArith(PositConfig cfg) : cfg_(cfg) {
    if (cfg.n() <= 16) {
        auto table = std::make_shared<std::vector<detail::Unpacked>>(std::size_t{1} << cfg.n());
        for (std::uint32_t b = 0; b < table->size(); ++b) (*table)[b] = detail::unpack(b, cfg);
        table_ = std::move(table);
    }
}

double PositArith::to_double(std::uint32_t a) const {
    const auto u = unpack(a);
    if (u.kind == ValueKind::Zero) return 0.0;
    if (u.kind == ValueKind::NaR) return std::nan("");
    const double mag = std::ldexp(static_cast<double>(u.sig), u.scale - 62);
    return u.negative ? -mag : mag;
}

HalfArith::HalfArith() {
    auto table = std::make_shared<std::vector<double>>(65536);
    for (std::uint32_t b = 0; b < 65536; ++b) (*table)[b] = h_to_f64(Half{static_cast<std::uint16_t>(b)});
    table_ = std::move(table);
}

const PositArith& posit_arith(PositConfig cfg) {
    static std::once_flag flags[PositConfig::kMaxBits + 1][PositConfig::kMaxEs + 1];
    static std::unique_ptr<PositArith> cache[PositConfig::kMaxBits + 1][PositConfig::kMaxEs + 1];
    std::call_once(flags[cfg.n()][cfg.es()],
                   [&] { cache[cfg.n()][cfg.es()] = std::make_unique<PositArith>(cfg); });
    return *cache[cfg.n()][cfg.es()];
}

const HalfArith& half_arith() {
    static const HalfArith arith;
    return arith;
}

const Float32Arith& float32_arith() {
    static const Float32Arith arith;
    return arith;
}

Scalar Scalar::from_double(double x, const NumericFormat& fmt) {
    return Scalar{fmt, with_arith(fmt, [&](const auto& ar) { return ar.from_double(x); })};
}

double Scalar::to_double() const {
    return with_arith(format, [&](const auto& ar) { return ar.to_double(bits); });
}

bool Scalar::is_non_finite() const {
    return with_arith(format, [&](const auto& ar) { return ar.is_non_finite(bits); });
}

namespace {

template <class Op>
Scalar combine(const Scalar& a, const Scalar& b, Op op) {
    if (!(a.format == b.format)) throw std::invalid_argument("scalar formats differ");
    return Scalar{a.format, with_arith(a.format, [&](const auto& ar) { return op(ar, a.bits, b.bits); })};
}

}  // namespace

Scalar operator+(const Scalar& a, const Scalar& b) {
    return combine(a, b, [](const auto& ar, auto x, auto y) { return ar.add(x, y); });
}
Scalar operator-(const Scalar& a, const Scalar& b) {
    return combine(a, b, [](const auto& ar, auto x, auto y) { return ar.sub(x, y); });
}
Scalar operator*(const Scalar& a, const Scalar& b) {
    return combine(a, b, [](const auto& ar, auto x, auto y) { return ar.mul(x, y); });
}
Scalar operator/(const Scalar& a, const Scalar& b) {
    return combine(a, b, [](const auto& ar, auto x, auto y) { return ar.div(x, y); });
}

}  // namespace posittrain
