#pragma once

#include <optional>

#include "sttsim/constants.hpp"

// Per-cell STT-MRAM error model: retention failure, read disturbance and
// write failure probabilities of a single cell, evaluated from its physical
// and circuit parameters. Aggregation over blocks/caches lives in engine.hpp.

namespace sttsim {

// Raw scalar evaluations. All times in seconds, currents in the unit system
// of the configuration (only ratios and the write-failure quotient matter).
//
// retention:    P = 1 - exp(-t * rate_scale * exp(-delta))
// read disturb: P = 1 - exp((-t_read/tau) * exp(delta*(i_read-i_c0)/i_c0))
// write fail:   P = exp(-t_write * 2*mu_beta*p*(i_write-i_c0)
//                        / (c + ln(pi^2*delta/4) * (e*m*(1+p^2)))), clamped to [0,1]
double retention_failure_probability(double delta, double t_idle_s, double rate_scale = 1.0);
double read_disturb_probability(double delta, double i_read, double i_c0, double t_read_s,
                                double tau_s);
double write_failure_probability(double delta, double i_c0, double i_write, double t_write_s,
                                 double m, double p_pol, double mu_beta, double euler_c,
                                 double e_charge);

// Log-survival primitives. These return ln(1 - P) without ever forming the
// survival product itself, so probabilities at the 1e-20 scale keep full
// relative precision when the engine sums them over millions of events.
double retention_log_survival(double delta, double t_idle_s, double rate_scale = 1.0);
double read_disturb_log_survival(double delta, double i_read, double i_c0, double t_read_s,
                                 double tau_s);
double write_fail_log_survival(double delta, double i_c0, double i_write, double t_write_s,
                               double m, double p_pol, double mu_beta, double euler_c,
                               double e_charge);

/// All physical/circuit parameters of one STT-MRAM cell.
struct CellParams {
    double delta = 0.0;        ///< thermal stability factor
    std::optional<double> e_b; ///< barrier energy (J); when set, delta = e_b/(K*T)
    double temperature = 300.0; ///< kelvin
    double i_c0 = 0.0;          ///< critical switching current
    double i_read = 0.0;        ///< read current
    double i_write = 0.0;       ///< write current
    double t_read = 0.0;        ///< read pulse duration, s
    double t_write = 0.0;       ///< write pulse duration, s
    double tau = 1e-9;          ///< attempt period, s
    double m = 0.0;             ///< magnetic momentum of the free layer
    double p_pol = 0.0;         ///< tunneling spin polarization, in (0,1)
    double mu_beta = constants::bohr_magneton;
    double euler_c = constants::euler_c;
    double e_charge = constants::electron_charge;
    double k_boltzmann = constants::k_boltzmann;
    // Optional attempt-rate prefactor on exp(-delta) in the retention model;
    // 1.0 evaluates the literal printed formula.
    double retention_rate_scale = 1.0;

    /// Throws InvalidParameter on any domain violation (delta <= 0, tau <= 0,
    /// i_c0 <= 0, p_pol outside (0,1), negative pulse widths, or a delta that
    /// disagrees with e_b/(K*T) by more than 1e-12 relative when e_b is set).
    void validate() const;

    /// Returns `base` with e_b set and delta recomputed as e_b/(K*T).
    static CellParams with_barrier_energy(CellParams base, double e_b, double temperature);

    double p_retention(double t_idle_s) const;
    double p_read_disturb() const;
    double p_write_fail() const;

    /// retention_rate_scale * exp(-delta): per-second failure intensity of one idle cell.
    double retention_rate() const;
    double read_disturb_logsurv() const;
    double write_fail_logsurv() const;
};

/// Direction-dependent write failure probabilities. The 0->1 direction is the
/// hard one in the nominal regime; configurations are expected (and linted,
/// not forced) to satisfy p_wf_0to1 > p_wf_1to0.
struct WriteFailurePair {
    double p_wf_0to1 = 0.0;
    double p_wf_1to0 = 0.0;
};

/// Evaluates the write failure probability once per direction preset.
WriteFailurePair write_failure_pair(const CellParams& params_0to1, const CellParams& params_1to0);

} // namespace sttsim
