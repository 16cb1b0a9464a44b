#include "sttsim/pv.hpp"

#include <algorithm>
#include <cmath>

#include "sttsim/errors.hpp"
#include "sttsim/rng.hpp"

namespace sttsim {

namespace {
// Floor keeping sampled physical quantities strictly positive even at
// extreme truncation settings.
constexpr double kPositiveFloor = 1e-12;
constexpr double kPolMargin = 1e-9;
} // namespace

const char* pv_param_name(PvParam p) {
    switch (p) {
    case PvParam::Delta: return "delta";
    case PvParam::IC0: return "i_c0";
    case PvParam::IRead: return "i_read";
    case PvParam::IWrite: return "i_write";
    case PvParam::M: return "m";
    case PvParam::PPol: return "p_pol";
    }
    return "?";
}

PvParam pv_param_from_name(const std::string& name) {
    for (std::uint32_t i = 0; i < kNumPvParams; ++i) {
        const auto p = static_cast<PvParam>(i);
        if (name == pv_param_name(p))
            return p;
    }
    throw InvalidParameter("unknown PV parameter name: " + name);
}

void PvConfig::validate() const {
    if (!(sigma_rel >= 0.0))
        throw InvalidParameter("pv: sigma_rel must be >= 0");
    if (!(truncation > 0.0))
        throw InvalidParameter("pv: truncation must be > 0");
    for (std::size_t i = 0; i < affected.size(); ++i)
        for (std::size_t j = i + 1; j < affected.size(); ++j)
            if (affected[i] == affected[j])
                throw InvalidParameter(std::string("pv: duplicate affected parameter ") +
                                       pv_param_name(affected[i]));
}

PvModel::PvModel(PvConfig config, CellParams nominal)
    : config_(std::move(config)), nominal_(std::move(nominal)) {
    config_.validate();
    nominal_.validate();
    for (PvParam p : config_.affected)
        affected_[static_cast<std::uint32_t>(p)] = true;
}

double PvModel::factor(const CellId& id, PvParam param) const {
    if (config_.sigma_rel == 0.0 || !affected_[static_cast<std::uint32_t>(param)])
        return 1.0;
    const std::uint64_t cell =
        (static_cast<std::uint64_t>(id.set_index) << 32) | id.way_index;
    const std::uint64_t bits = rng::hash4(config_.seed, cell, id.bit_index,
                                          static_cast<std::uint64_t>(param));
    double z = rng::gaussian(bits);
    z = std::clamp(z, -config_.truncation, config_.truncation);
    return 1.0 + config_.sigma_rel * z;
}

namespace {
// Identity factors must reproduce the base value bit-exactly, so the floor
// is only applied to genuinely perturbed values.
double scale_floored(double v, double f, double floor_at) {
    return f == 1.0 ? v : std::max(v * f, floor_at);
}
} // namespace

CellParams PvModel::apply(const CellParams& base, const CellId& id) const {
    CellParams out = base;
    out.delta = scale_floored(base.delta, factor(id, PvParam::Delta), kPositiveFloor);
    out.i_c0 = scale_floored(base.i_c0, factor(id, PvParam::IC0), kPositiveFloor);
    out.i_read = scale_floored(base.i_read, factor(id, PvParam::IRead), kPositiveFloor);
    out.i_write = scale_floored(base.i_write, factor(id, PvParam::IWrite), kPositiveFloor);
    out.m = scale_floored(base.m, factor(id, PvParam::M), kPositiveFloor);
    const double fp = factor(id, PvParam::PPol);
    if (fp != 1.0)
        out.p_pol = std::clamp(base.p_pol * fp, kPolMargin, 1.0 - kPolMargin);
    // A jittered delta no longer matches e_b/(K*T); drop the stale pair
    // rather than carry one that would fail validation.
    if (out.delta != base.delta)
        out.e_b.reset();
    return out;
}

CellParams PvModel::sample_cell(const CellId& id) const { return apply(nominal_, id); }

} // namespace sttsim
