#include "fbrk/schemes.hpp"

#include "fbrk/errors.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace fbrk {

bool FBWeights::finite() const {
    return std::isfinite(beta1) && std::isfinite(beta2) && std::isfinite(beta3);
}

namespace {

double parse_double(std::string_view token, std::string_view whole) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw DomainError("bad weight '" + std::string(token) + "' in scheme '" + std::string(whole) + "'");
    return value;
}

} // namespace

SchemeSpec parse_scheme(std::string_view text) {
    if (text == "ssprk3") return SchemeSpec::ssprk3();
    if (text == "rk3") return SchemeSpec::rk3();
    if (text == "rk4") return SchemeSpec::rk4();

    constexpr std::string_view prefix = "fbrk32:";
    if (text.substr(0, prefix.size()) != prefix)
        throw DomainError("unknown scheme '" + std::string(text) + "' (expected ssprk3, rk3, rk4 or fbrk32:b1,b2,b3)");

    std::vector<double> betas;
    std::string_view rest = text.substr(prefix.size());
    while (true) {
        const auto comma = rest.find(',');
        betas.push_back(parse_double(rest.substr(0, comma), text));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    if (betas.size() != 3) throw DomainError("fbrk32 needs exactly three weights: '" + std::string(text) + "'");
    const FBWeights w{betas[0], betas[1], betas[2]};
    if (!w.finite()) throw DomainError("non-finite FB weight in '" + std::string(text) + "'");
    return SchemeSpec::fbrk32(w);
}

std::string to_string(const SchemeSpec& scheme) {
    switch (scheme.kind) {
    case SchemeKind::SSPRK3: return "ssprk3";
    case SchemeKind::RK3: return "rk3";
    case SchemeKind::RK4: return "rk4";
    case SchemeKind::FBRK32: {
        std::ostringstream out;
        out.precision(17);
        out << "fbrk32:" << scheme.weights.beta1 << ',' << scheme.weights.beta2 << ','
            << scheme.weights.beta3;
        return out.str();
    }
    }
    return "unknown";
}

} // namespace fbrk
