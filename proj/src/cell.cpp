#include "sttsim/cell.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sttsim/errors.hpp"

namespace sttsim {

namespace {

// ln(1 - exp(x)) for x <= 0, stable on both ends.
double log1mexp(double x) {
    if (x >= 0.0)
        return x == 0.0 ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::quiet_NaN();
    constexpr double ln2 = 0.6931471805599453;
    return x < -ln2 ? std::log1p(-std::exp(x)) : std::log(-std::expm1(x));
}

void require(bool cond, const char* msg) {
    if (!cond)
        throw InvalidParameter(msg);
}

} // namespace

double retention_log_survival(double delta, double t_idle_s, double rate_scale) {
    require(std::isfinite(delta) && delta >= 0.0, "retention: delta must be finite and >= 0");
    require(t_idle_s >= 0.0, "retention: idle time must be >= 0");
    require(rate_scale >= 0.0, "retention: rate scale must be >= 0");
    return -t_idle_s * rate_scale * std::exp(-delta);
}

double retention_failure_probability(double delta, double t_idle_s, double rate_scale) {
    return -std::expm1(retention_log_survival(delta, t_idle_s, rate_scale));
}

double read_disturb_log_survival(double delta, double i_read, double i_c0, double t_read_s,
                                 double tau_s) {
    require(tau_s > 0.0, "read disturb: tau must be > 0");
    require(i_c0 > 0.0, "read disturb: i_c0 must be > 0");
    require(t_read_s >= 0.0, "read disturb: t_read must be >= 0");
    return (-t_read_s / tau_s) * std::exp(delta * (i_read - i_c0) / i_c0);
}

double read_disturb_probability(double delta, double i_read, double i_c0, double t_read_s,
                                double tau_s) {
    return -std::expm1(read_disturb_log_survival(delta, i_read, i_c0, t_read_s, tau_s));
}

// Exponent of the write-failure decay, -t_write * num / den, with the
// denominator grouped exactly as c + ln(pi^2*delta/4) * (e*m*(1+p^2)).
static double write_fail_exponent(double delta, double i_c0, double i_write, double t_write_s,
                                  double m, double p_pol, double mu_beta, double euler_c,
                                  double e_charge) {
    require(delta > 0.0, "write fail: delta must be > 0");
    require(t_write_s >= 0.0, "write fail: t_write must be >= 0");
    const double num = 2.0 * mu_beta * p_pol * (i_write - i_c0);
    const double den =
        euler_c + std::log(M_PI * M_PI * delta / 4.0) * (e_charge * m * (1.0 + p_pol * p_pol));
    if (!(den > 0.0))
        throw InvalidParameter("write fail: nonpositive denominator (c + ln(pi^2*delta/4)*e*m*(1+p^2) = " +
                               std::to_string(den) + ")");
    return -t_write_s * num / den;
}

double write_failure_probability(double delta, double i_c0, double i_write, double t_write_s,
                                 double m, double p_pol, double mu_beta, double euler_c,
                                 double e_charge) {
    const double x =
        write_fail_exponent(delta, i_c0, i_write, t_write_s, m, p_pol, mu_beta, euler_c, e_charge);
    // x > 0 happens at negative overdrive; the model saturates at certain failure.
    if (x >= 0.0)
        return 1.0;
    return std::exp(x);
}

double write_fail_log_survival(double delta, double i_c0, double i_write, double t_write_s,
                               double m, double p_pol, double mu_beta, double euler_c,
                               double e_charge) {
    const double x =
        write_fail_exponent(delta, i_c0, i_write, t_write_s, m, p_pol, mu_beta, euler_c, e_charge);
    if (x >= 0.0)
        return -std::numeric_limits<double>::infinity(); // p_wf == 1, survival 0
    return log1mexp(x);
}

void CellParams::validate() const {
    require(std::isfinite(delta) && delta > 0.0, "cell: delta must be > 0");
    require(tau > 0.0, "cell: tau must be > 0");
    require(t_read >= 0.0, "cell: t_read must be >= 0");
    require(t_write >= 0.0, "cell: t_write must be >= 0");
    require(i_c0 > 0.0, "cell: i_c0 must be > 0");
    require(p_pol > 0.0 && p_pol < 1.0, "cell: p_pol must be in (0,1)");
    require(retention_rate_scale >= 0.0, "cell: retention_rate_scale must be >= 0");
    if (e_b) {
        require(temperature > 0.0, "cell: temperature must be > 0 when e_b is set");
        require(k_boltzmann > 0.0, "cell: k_boltzmann must be > 0");
        const double derived = *e_b / (k_boltzmann * temperature);
        if (std::abs(derived - delta) > 1e-12 * std::abs(derived))
            throw InvalidParameter("cell: delta inconsistent with e_b/(K*T)");
    }
}

CellParams CellParams::with_barrier_energy(CellParams base, double e_b, double temperature) {
    require(temperature > 0.0, "cell: temperature must be > 0");
    require(base.k_boltzmann > 0.0, "cell: k_boltzmann must be > 0");
    base.e_b = e_b;
    base.temperature = temperature;
    base.delta = e_b / (base.k_boltzmann * temperature);
    return base;
}

double CellParams::p_retention(double t_idle_s) const {
    return retention_failure_probability(delta, t_idle_s, retention_rate_scale);
}

double CellParams::p_read_disturb() const {
    return read_disturb_probability(delta, i_read, i_c0, t_read, tau);
}

double CellParams::p_write_fail() const {
    return write_failure_probability(delta, i_c0, i_write, t_write, m, p_pol, mu_beta, euler_c,
                                     e_charge);
}

double CellParams::retention_rate() const {
    return retention_rate_scale * std::exp(-delta);
}

double CellParams::read_disturb_logsurv() const {
    return read_disturb_log_survival(delta, i_read, i_c0, t_read, tau);
}

double CellParams::write_fail_logsurv() const {
    return write_fail_log_survival(delta, i_c0, i_write, t_write, m, p_pol, mu_beta, euler_c,
                                   e_charge);
}

WriteFailurePair write_failure_pair(const CellParams& params_0to1, const CellParams& params_1to0) {
    params_0to1.validate();
    params_1to0.validate();
    return WriteFailurePair{params_0to1.p_write_fail(), params_1to0.p_write_fail()};
}

} // namespace sttsim
