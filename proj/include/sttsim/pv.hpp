#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sttsim/cell.hpp"

// Process-variation model: deterministic per-cell sampling of the PV-affected
// parameters (delta, i_c0, i_read, i_write, m, p_pol) around their nominal
// values. Draws are computed lazily by counter-based hashing of
// (seed, cell id, parameter), so no per-cell state is ever stored.

namespace sttsim {

/// The parameters that vary under process variations.
enum class PvParam : std::uint32_t {
    Delta = 0,
    IC0 = 1,
    IRead = 2,
    IWrite = 3,
    M = 4,
    PPol = 5,
};
inline constexpr std::uint32_t kNumPvParams = 6;

const char* pv_param_name(PvParam p);
/// Parses "delta", "i_c0", "i_read", "i_write", "m", "p_pol". Throws InvalidParameter.
PvParam pv_param_from_name(const std::string& name);

struct PvConfig {
    double sigma_rel = 0.05;   ///< relative std deviation per affected parameter
    std::uint64_t seed = 0;    ///< reproducibility seed
    double truncation = 4.0;   ///< symmetric truncation bound, units of sigma
    /// Which parameters are drawn per cell; defaults to all six.
    std::vector<PvParam> affected = {PvParam::Delta, PvParam::IC0,  PvParam::IRead,
                                     PvParam::IWrite, PvParam::M,   PvParam::PPol};

    void validate() const; // sigma_rel >= 0, truncation > 0, no duplicate parameters
};

/// Physical position of one cell: (set, way, bit) within the cache geometry.
struct CellId {
    std::uint32_t set_index = 0;
    std::uint32_t way_index = 0;
    std::uint32_t bit_index = 0;
};

class PvModel {
public:
    PvModel(PvConfig config, CellParams nominal);

    const PvConfig& config() const { return config_; }
    const CellParams& nominal() const { return nominal_; }

    /// Multiplicative deviation factor for one (cell, parameter) pair.
    /// Pure function of (seed, id, param); sigma_rel == 0 returns exactly 1.
    double factor(const CellId& id, PvParam param) const;

    /// Nominal parameters with every affected parameter scaled by its
    /// per-cell factor. Values are floored at a small positive epsilon and
    /// p_pol is kept inside (0,1).
    CellParams sample_cell(const CellId& id) const;

    /// Applies this cell's factors to an arbitrary base parameter set (used
    /// for the direction-specific write presets, so that a given physical
    /// parameter of one cell deviates coherently across presets).
    CellParams apply(const CellParams& base, const CellId& id) const;

private:
    PvConfig config_;
    CellParams nominal_;
    bool affected_[kNumPvParams] = {};
};

} // namespace sttsim
