#include <doctest.h>

#include <cmath>
#include <set>

#include "sttsim/errors.hpp"
#include "sttsim/pv.hpp"
#include "sttsim/rng.hpp"

using namespace sttsim;

TEST_CASE("stream determinism and separation") {
    rng::Stream a(1234, 7);
    rng::Stream b(1234, 7);
    rng::Stream c(1234, 8);
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("uniform draws stay inside their ranges") {
    rng::Stream s(99, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.next_uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = s.next_open01();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("bernoulli edge probabilities") {
    rng::Stream s(5, 0);
    for (int i = 0; i < 1000; ++i) {
        CHECK(!s.next_bernoulli(0.0));
        CHECK(s.next_bernoulli(1.0));
    }
}

TEST_CASE("inverse normal cdf reference quantiles") {
    CHECK(rng::inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rng::inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-8));
    CHECK(rng::inverse_normal_cdf(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-8));
    CHECK(rng::inverse_normal_cdf(0.841344746068543) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::isnan(rng::inverse_normal_cdf(0.0)));
    CHECK(std::isnan(rng::inverse_normal_cdf(1.0)));
    CHECK(std::isnan(rng::inverse_normal_cdf(-0.5)));
}

TEST_CASE("gaussian sample statistics") {
    rng::Stream s(2024, 3);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng::gaussian(s.next_u64());
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

namespace {

CellParams nominal_cell() {
    CellParams p;
    p.delta = 45.0;
    p.i_c0 = 40.0;
    p.i_read = 15.0;
    p.i_write = 55.0;
    p.t_read = 1e-9;
    p.t_write = 5.0;
    p.tau = 1e-9;
    p.m = 1.0;
    p.p_pol = 0.6;
    p.mu_beta = 1.0;
    p.e_charge = 1.0;
    return p;
}

} // namespace

TEST_CASE("pv param names round trip") {
    for (std::uint32_t i = 0; i < kNumPvParams; ++i) {
        const auto p = static_cast<PvParam>(i);
        CHECK(pv_param_from_name(pv_param_name(p)) == p);
    }
    CHECK_THROWS_AS(pv_param_from_name("bogus"), InvalidParameter);
}

TEST_CASE("pv config validation") {
    PvConfig c;
    CHECK_NOTHROW(c.validate());
    c.sigma_rel = -0.1;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = PvConfig{};
    c.truncation = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = PvConfig{};
    c.affected = {PvParam::Delta, PvParam::Delta};
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("sigma zero reproduces nominal exactly") {
    PvConfig c;
    c.sigma_rel = 0.0;
    const CellParams nom = nominal_cell();
    const PvModel pv(c, nom);
    for (std::uint32_t bit = 0; bit < 64; ++bit) {
        const CellId id{3, 1, bit};
        for (std::uint32_t p = 0; p < kNumPvParams; ++p)
            CHECK(pv.factor(id, static_cast<PvParam>(p)) == 1.0);
        const CellParams s = pv.sample_cell(id);
        CHECK(s.delta == nom.delta);
        CHECK(s.i_c0 == nom.i_c0);
        CHECK(s.i_read == nom.i_read);
        CHECK(s.i_write == nom.i_write);
        CHECK(s.m == nom.m);
        CHECK(s.p_pol == nom.p_pol);
        CHECK(s.t_read == nom.t_read);
        CHECK(s.t_write == nom.t_write);
        CHECK(s.tau == nom.tau);
    }
}

TEST_CASE("pv sampling is deterministic per cell") {
    PvConfig c;
    c.seed = 77;
    const PvModel pv(c, nominal_cell());
    const CellId id{5, 2, 17};
    const CellParams a = pv.sample_cell(id);
    const CellParams b = pv.sample_cell(id);
    CHECK(a.delta == b.delta);
    CHECK(a.i_c0 == b.i_c0);
    CHECK(a.p_pol == b.p_pol);

    // different cells draw different values almost surely
    const CellParams other = pv.sample_cell(CellId{5, 2, 18});
    CHECK(a.delta != other.delta);
}

TEST_CASE("pv factors respect truncation") {
    PvConfig c;
    c.sigma_rel = 0.05;
    c.truncation = 4.0;
    const PvModel pv(c, nominal_cell());
    for (std::uint32_t bit = 0; bit < 2000; ++bit) {
        const double f = pv.factor(CellId{0, 0, bit}, PvParam::Delta);
        CHECK(f >= 1.0 - 0.05 * 4.0);
        CHECK(f <= 1.0 + 0.05 * 4.0);
    }
}

TEST_CASE("unaffected parameters never move") {
    PvConfig c;
    c.sigma_rel = 0.05;
    c.affected = {PvParam::Delta};
    const CellParams nom = nominal_cell();
    const PvModel pv(c, nom);
    bool delta_moved = false;
    for (std::uint32_t bit = 0; bit < 32; ++bit) {
        const CellParams s = pv.sample_cell(CellId{1, 0, bit});
        if (s.delta != nom.delta) delta_moved = true;
        CHECK(s.i_c0 == nom.i_c0);
        CHECK(s.i_read == nom.i_read);
        CHECK(s.i_write == nom.i_write);
        CHECK(s.m == nom.m);
        CHECK(s.p_pol == nom.p_pol);
    }
    CHECK(delta_moved);
}

TEST_CASE("pulse widths and tau stay nominal under pv") {
    PvConfig c;
    c.sigma_rel = 0.05;
    const CellParams nom = nominal_cell();
    const PvModel pv(c, nom);
    for (std::uint32_t bit = 0; bit < 64; ++bit) {
        const CellParams s = pv.sample_cell(CellId{0, 1, bit});
        CHECK(s.t_read == nom.t_read);
        CHECK(s.t_write == nom.t_write);
        CHECK(s.tau == nom.tau);
    }
}

TEST_CASE("sampled parameters stay physical under extreme sigma") {
    PvConfig c;
    c.sigma_rel = 0.9;
    c.truncation = 6.0; // factors down to 1 - 5.4 without flooring
    const PvModel pv(c, nominal_cell());
    for (std::uint32_t bit = 0; bit < 5000; ++bit) {
        const CellParams s = pv.sample_cell(CellId{0, 0, bit});
        CHECK(s.delta > 0.0);
        CHECK(s.i_c0 > 0.0);
        CHECK(s.i_read > 0.0);
        CHECK(s.i_write > 0.0);
        CHECK(s.m > 0.0);
        CHECK(s.p_pol > 0.0);
        CHECK(s.p_pol < 1.0);
    }
}

TEST_CASE("per cell delta statistics over a large population") {
    // sample mean within 0.2% of nominal, sample sigma within 2% of the
    // requested 5% relative deviation
    PvConfig c;
    c.sigma_rel = 0.05;
    c.seed = 11;
    const CellParams nom = nominal_cell();
    const PvModel pv(c, nom);
    const std::uint64_t n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const CellId id{static_cast<std::uint32_t>(i >> 9), 0,
                        static_cast<std::uint32_t>(i & 511)};
        const double d = pv.apply(nom, id).delta;
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum2 / static_cast<double>(n) - mean * mean;
    const double sd = std::sqrt(var);
    CHECK(std::abs(mean - nom.delta) < 0.002 * nom.delta);
    CHECK(std::abs(sd - 0.05 * nom.delta) < 0.02 * 0.05 * nom.delta);
}

TEST_CASE("apply moves presets coherently per cell") {
    PvConfig c;
    c.sigma_rel = 0.05;
    const CellParams nom = nominal_cell();
    CellParams other = nom;
    other.i_write = 75.0;
    const PvModel pv(c, nom);
    for (std::uint32_t bit = 0; bit < 16; ++bit) {
        const CellId id{2, 3, bit};
        const CellParams sa = pv.apply(nom, id);
        const CellParams sb = pv.apply(other, id);
        // same physical cell: identical multiplicative deviation per parameter
        CHECK(sa.delta == sb.delta);
        CHECK(sa.i_c0 == sb.i_c0);
        CHECK(sa.i_write / nom.i_write == doctest::Approx(sb.i_write / other.i_write)
                                              .epsilon(1e-15));
    }
}
