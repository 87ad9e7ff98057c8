#include "posittrain/verify.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "posittrain/half.hpp"
#include "posittrain/network.hpp"
#include "posittrain/oracle.hpp"
#include "posittrain/rng.hpp"

namespace posittrain::verify {

using oracle::Rational;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string hex(std::uint32_t v, int digits) {
    std::ostringstream os;
    os << "0x" << std::hex << std::uppercase;
    os.width(digits);
    os.fill('0');
    os << v;
    return os.str();
}

std::optional<Rational> to_rational(const ExactReal& x) {
    if (x.is_nar()) return std::nullopt;
    if (x.is_zero()) return Rational(0);
    Rational v(x.significand);
    const auto lsb = x.lsb_exponent();
    Rational two = lsb >= 0 ? Rational(2) : Rational(1, 2);
    for (std::int64_t i = 0; i < (lsb >= 0 ? lsb : -lsb); ++i) v *= two;
    return x.negative ? Rational(-v) : v;
}

enum class Op { Add, Sub, Mul, Div };
constexpr Op kOps[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};
const char* op_name(Op op) {
    switch (op) {
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
    }
    return "?";
}

const std::function<PositBits(PositBits, PositBits)>& pick(const PositOps& ops, Op op) {
    switch (op) {
        case Op::Add: return ops.add;
        case Op::Sub: return ops.sub;
        case Op::Mul: return ops.mul;
        case Op::Div: break;
    }
    return ops.div;
}

std::optional<Rational> exact_op(Op op, const std::optional<Rational>& a, const std::optional<Rational>& b) {
    if (!a || !b) return std::nullopt;
    switch (op) {
        case Op::Add: return *a + *b;
        case Op::Sub: return *a - *b;
        case Op::Mul: return *a * *b;
        case Op::Div: break;
    }
    if (*b == 0) return std::nullopt;
    return *a / *b;
}

detail::Unpacked force_sticky(detail::Unpacked u) {
    if (u.kind == ValueKind::Finite) u.sticky = true;
    return u;
}

}  // namespace

PositOps fast_ops() {
    return PositOps{"fast", [](PositBits a, PositBits b) { return add(a, b); },
                    [](PositBits a, PositBits b) { return sub(a, b); },
                    [](PositBits a, PositBits b) { return mul(a, b); },
                    [](PositBits a, PositBits b) { return div(a, b); }};
}

PositOps reference_ops() {
    return PositOps{"reference", [](PositBits a, PositBits b) { return reference::add(a, b); },
                    [](PositBits a, PositBits b) { return reference::sub(a, b); },
                    [](PositBits a, PositBits b) { return reference::mul(a, b); },
                    [](PositBits a, PositBits b) { return reference::div(a, b); }};
}

PositOps ties_away_ops() {
    // An exact tie plus sticky reads as "just above the tie", so it rounds
    // up in magnitude; every other result is unaffected.
    const auto wrap = [](auto kernel) {
        return [kernel](PositBits a, PositBits b) {
            const auto u = kernel(detail::unpack(a.bits, a.cfg), detail::unpack(b.bits, b.cfg));
            return PositBits{detail::pack_round(force_sticky(u), a.cfg), a.cfg};
        };
    };
    return PositOps{
        "ties-away",
        wrap([](const detail::Unpacked& a, const detail::Unpacked& b) { return detail::add(a, b); }),
        wrap([](const detail::Unpacked& a, const detail::Unpacked& b) { return detail::add(a, detail::negate(b)); }),
        wrap([](const detail::Unpacked& a, const detail::Unpacked& b) { return detail::mul(a, b); }),
        wrap([](const detail::Unpacked& a, const detail::Unpacked& b) { return detail::div(a, b); })};
}

void SuiteReport::fail(const std::string& counterexample) {
    passed = false;
    if (failures++ == 0) first_counterexample = counterexample;
}

void to_json(nlohmann::json& j, const SuiteReport& r) {
    j = nlohmann::json{{"suite", r.suite},
                       {"passed", r.passed},
                       {"cases", r.cases},
                       {"failures", r.failures},
                       {"first_counterexample", r.first_counterexample.empty() ? nlohmann::json(nullptr)
                                                                              : nlohmann::json(r.first_counterexample)},
                       {"seconds", r.seconds},
                       {"details", r.details}};
}

SuiteReport posit8_exhaustive(const std::vector<PositOps>& routes) {
    const auto start = Clock::now();
    SuiteReport report;
    report.suite = "posit8-exhaustive";
    for (int es = 0; es <= 2; ++es) {
        const PositConfig cfg(8, es);
        const oracle::PositRounder rounder(8, es);
        const auto& values = rounder.values();
        const std::string tag = "es=" + std::to_string(es) + " ";

        std::uint64_t decode_failures = 0;
        for (std::uint32_t p = 0; p < 256; ++p) {
            ++report.cases;
            const auto got = to_rational(to_exact(PositBits{p, cfg}));
            const double got_f64 = to_f64(PositBits{p, cfg});
            const bool f64_ok = values[p] ? got_f64 == values[p]->convert_to<double>() : std::isnan(got_f64);
            if (got != values[p] || !f64_ok) {
                ++decode_failures;
                report.fail(tag + "decode " + hex(p, 2) + ": expected " +
                            (values[p] ? values[p]->str() : std::string("NaR")));
            }
        }

        nlohmann::json per_es{{"decode_failures", decode_failures}};
        for (Op op : kOps) {
            std::vector<std::uint32_t> expected(256 * 256);
            std::vector<std::uint8_t> tie(256 * 256);
            for (std::uint32_t a = 0; a < 256; ++a) {
                for (std::uint32_t b = 0; b < 256; ++b) {
                    const auto exact = exact_op(op, values[a], values[b]);
                    expected[a * 256 + b] = exact ? rounder.round(*exact) : cfg.nar_pattern();
                    tie[a * 256 + b] = exact && rounder.is_tie(*exact);
                }
            }
            for (const auto& route : routes) {
                const auto& fn = pick(route, op);
                std::uint64_t failures = 0;
                for (std::uint32_t a = 0; a < 256; ++a) {
                    for (std::uint32_t b = 0; b < 256; ++b) {
                        ++report.cases;
                        const std::uint32_t got = fn(PositBits{a, cfg}, PositBits{b, cfg}).bits;
                        const std::uint32_t want = expected[a * 256 + b];
                        if (got == want) continue;
                        ++failures;
                        const auto exact = exact_op(op, values[a], values[b]);
                        report.fail(tag + route.name + " " + op_name(op) + "(" + hex(a, 2) + ", " + hex(b, 2) +
                                    "): got " + hex(got, 2) + ", expected " + hex(want, 2) + " (exact " +
                                    (exact ? exact->str() : std::string("NaR")) +
                                    (tie[a * 256 + b] ? ", tie" : "") + ")");
                    }
                }
                per_es[route.name + "_" + op_name(op) + "_failures"] = failures;
            }
        }
        report.details["es" + std::to_string(es)] = per_es;
    }
    report.seconds = since(start);
    return report;
}

SuiteReport posit16_roundtrip() {
    const auto start = Clock::now();
    SuiteReport report;
    report.suite = "posit16-roundtrip";
    const PositConfig cfg(16, 1);
    std::uint64_t roundtrip_failures = 0;
    std::uint64_t value_failures = 0;
    std::uint64_t order_failures = 0;
    std::optional<Rational> previous;
    // Walk patterns in signed-integer order: 0x8001 (most negative) .. 0x7FFF.
    for (std::int32_t s = -32767; s <= 32767; ++s) {
        const auto p = static_cast<std::uint32_t>(static_cast<std::uint16_t>(s));
        const PositBits bits{p, cfg};
        ++report.cases;
        const auto exact = to_exact(bits);
        const auto back = encode_round(exact, cfg);
        if (back.bits != p) {
            ++roundtrip_failures;
            report.fail("roundtrip " + hex(p, 4) + " -> " + hex(back.bits, 4));
        }
        const auto value = oracle::posit_value(p, 16, 1);
        if (to_rational(exact) != value) {
            ++value_failures;
            report.fail("decode " + hex(p, 4) + ": expected " + value->str());
        }
        if (previous && !(*previous < *value)) {
            ++order_failures;
            report.fail("order: " + hex(p, 4) + " is not above its signed predecessor");
        }
        previous = value;
    }
    ++report.cases;
    const PositBits nar = PositBits::nar(cfg);
    if (encode_round(to_exact(nar), cfg) != nar) report.fail("roundtrip NaR");
    report.details = {{"roundtrip_failures", roundtrip_failures},
                      {"decode_failures", value_failures},
                      {"order_failures", order_failures}};
    report.seconds = since(start);
    return report;
}

SuiteReport half_exhaustive(std::uint64_t random_cases, std::uint64_t reference_cases) {
    const auto start = Clock::now();
    SuiteReport report;
    report.suite = "half-exhaustive";

    std::uint64_t roundtrip_failures = 0;
    for (std::uint32_t p = 0; p < 0x10000; ++p) {
        const Half h{static_cast<std::uint16_t>(p)};
        if (h.is_nan()) continue;
        ++report.cases;
        const double v = h_to_f64(h);
        const bool ok = std::bit_cast<std::uint64_t>(v) == std::bit_cast<std::uint64_t>(oracle::half_value(h.bits)) &&
                        h_from_f64(v) == h && oracle::half_round(v) == h.bits &&
                        (!h.is_finite() || round_to_ieee(to_exact(h), kBinary16) == p);
        if (!ok) {
            ++roundtrip_failures;
            report.fail("roundtrip " + hex(p, 4));
        }
    }

    const auto check = [&](std::uint16_t a, std::uint16_t b, bool with_reference, std::uint64_t& failures) {
        const double x = oracle::half_value(a);
        const double y = oracle::half_value(b);
        const std::uint16_t want[] = {oracle::half_round(x + y), oracle::half_round(x - y), oracle::half_round(x * y),
                                      oracle::half_round(x / y)};
        const Half ha{a};
        const Half hb{b};
        const Half fast[] = {h_add(ha, hb), h_sub(ha, hb), h_mul(ha, hb), h_div(ha, hb)};
        for (int k = 0; k < 4; ++k) {
            ++report.cases;
            std::uint16_t got = fast[k].bits;
            bool bad = got != want[k];
            if (with_reference) {
                ++report.cases;
                const Half r = k == 0 ? reference::h_add(ha, hb)
                             : k == 1 ? reference::h_sub(ha, hb)
                             : k == 2 ? reference::h_mul(ha, hb)
                                      : reference::h_div(ha, hb);
                if (r.bits != want[k]) {
                    bad = true;
                    got = r.bits;
                }
            }
            if (bad) {
                ++failures;
                report.fail(std::string(op_name(kOps[k])) + "(" + hex(a, 4) + ", " + hex(b, 4) + "): got " +
                            hex(got, 4) + ", expected " + hex(want[k], 4));
            }
        }
    };

    static constexpr std::uint16_t kSpecials[] = {0x0000, 0x8000, 0x7C00, 0xFC00, 0x7E00, 0xFE00, 0x7C01,
                                                  0x0001, 0x8001, 0x03FF, 0x83FF, 0x0400, 0x8400, 0x7BFF,
                                                  0xFBFF, 0x3C00, 0xBC00, 0x3555, 0x0200};
    std::uint64_t special_failures = 0;
    for (auto a : kSpecials)
        for (auto b : kSpecials) check(a, b, true, special_failures);

    std::uint64_t random_failures = 0;
    const auto rng = CounterRng::derive(0x5EED, Stream::Test, 16);
    for (std::uint64_t i = 0; i < random_cases; ++i) {
        const std::uint64_t r = rng.at(i);
        const auto a = static_cast<std::uint16_t>(r);
        // Half the pairs are near neighbours to exercise cancellation.
        const auto b = (r >> 63) != 0 ? static_cast<std::uint16_t>(r >> 16)
                                      : static_cast<std::uint16_t>(a + static_cast<std::int16_t>((r >> 16) & 0x3F) - 32);
        check(a, b, i < reference_cases, random_failures);
    }

    // Every pattern against 256 stratified partners, addition, fast route.
    std::uint64_t stratified_failures = 0;
    for (std::uint32_t a = 0; a < 0x10000; ++a) {
        for (std::uint32_t k = 0; k < 256; ++k) {
            const auto b = static_cast<std::uint16_t>((k << 8) | ((k * 37 + a) & 0xFF));
            ++report.cases;
            const auto got = h_add(Half{static_cast<std::uint16_t>(a)}, Half{b}).bits;
            const auto want =
                oracle::half_round(oracle::half_value(static_cast<std::uint16_t>(a)) + oracle::half_value(b));
            if (got != want) {
                ++stratified_failures;
                report.fail("add(" + hex(a, 4) + ", " + hex(b, 4) + "): got " + hex(got, 4) + ", expected " +
                            hex(want, 4));
            }
        }
    }

    report.details = {{"roundtrip_failures", roundtrip_failures},
                      {"special_pair_failures", special_failures},
                      {"random_cases", random_cases},
                      {"random_reference_cases", std::min(random_cases, reference_cases)},
                      {"random_failures", random_failures},
                      {"stratified_add_failures", stratified_failures}};
    report.seconds = since(start);
    return report;
}

SuiteReport gradcheck() {
    const auto start = Clock::now();
    SuiteReport report;
    report.suite = "gradcheck";

    const NumericFormat f32 = NumericFormat::binary32();
    const std::vector<std::size_t> sizes{4, 5, 3};
    const std::size_t batch = 6;
    const Network net = Network::he_uniform(f32, sizes, 7);

    const auto rng = CounterRng::derive(11, Stream::Test, 0);
    std::vector<double> x(batch * sizes.front());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.0 * rng.uniform(i) - 1.0;
    std::vector<std::size_t> labels(batch);
    std::vector<double> onehot(batch * sizes.back(), 0.0);
    for (std::size_t r = 0; r < batch; ++r) {
        labels[r] = r % sizes.back();
        onehot[r * sizes.back() + labels[r]] = 1.0;
    }

    const Tensor xt = Tensor::from_doubles({batch, sizes.front()}, f32, x);
    const Tensor yt = Tensor::from_doubles({batch, sizes.back()}, f32, onehot);
    const auto fwd = forward(net, xt);
    const auto loss = softmax_xent(fwd.logits, yt);
    const auto grads = backward(net, fwd.cache, loss.dlogits);

    oracle::Mlp64 mlp;
    mlp.sizes = sizes;
    std::vector<std::vector<double>> analytic;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        mlp.weights.push_back(net.layers()[l].weights.to_doubles());
        mlp.biases.push_back(net.layers()[l].bias.to_doubles());
        analytic.push_back(grads[l].weights.to_doubles());
        analytic.push_back(grads[l].bias.to_doubles());
    }
    // Inputs as the network saw them (rounded to binary32).
    const std::vector<double> x32 = xt.to_doubles();
    const double loss64 = mlp.loss(x32, labels);

    constexpr double kStep = 1e-3;
    constexpr double kTolerance = 1e-2;
    constexpr double kFloor = 1e-8;
    double max_rel = 0.0;
    std::uint64_t skipped = 0;
    for (std::size_t t = 0; t < analytic.size(); ++t) {
        auto& target = t % 2 == 0 ? mlp.weights[t / 2] : mlp.biases[t / 2];
        for (std::size_t i = 0; i < target.size(); ++i) {
            ++report.cases;
            const double saved = target[i];
            target[i] = saved + kStep;
            const double up = mlp.loss(x32, labels);
            target[i] = saved - kStep;
            const double down = mlp.loss(x32, labels);
            target[i] = saved;
            const double numeric = (up - down) / (2.0 * kStep);
            const double a = analytic[t][i];
            if (std::fabs(a) < kFloor && std::fabs(numeric) < kFloor) {
                ++skipped;
                continue;
            }
            const double rel = std::fabs(a - numeric) / std::max(std::fabs(a), std::fabs(numeric));
            max_rel = std::max(max_rel, rel);
            if (!(rel < kTolerance)) {
                std::ostringstream os;
                os << (t % 2 == 0 ? "W" : "b") << t / 2 << "[" << i << "]: analytic " << a << ", numeric " << numeric
                   << ", relative error " << rel;
                report.fail(os.str());
            }
        }
    }
    report.details = {{"parameters", report.cases},
                      {"max_relative_error", max_rel},
                      {"tolerance", kTolerance},
                      {"step", kStep},
                      {"skipped_below_floor", skipped},
                      {"loss_binary32", loss.loss.to_double()},
                      {"loss_binary64", loss64}};
    report.seconds = since(start);
    return report;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"posit8-exhaustive", "posit16-roundtrip", "half-exhaustive",
                                                "gradcheck"};
    return names;
}

SuiteReport run_suite(const std::string& name) {
    if (name == "posit8-exhaustive") return posit8_exhaustive();
    if (name == "posit16-roundtrip") return posit16_roundtrip();
    if (name == "half-exhaustive") return half_exhaustive();
    if (name == "gradcheck") return gradcheck();
    throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace posittrain::verify
