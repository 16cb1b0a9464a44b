#include "sttsim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "sttsim/errors.hpp"
#include "sttsim/rng.hpp"

namespace sttsim {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw InvalidParameter(msg);
}

// Inverse-CDF lookup table for Zipf-distributed block popularity.
class ZipfPicker {
public:
    ZipfPicker(std::uint64_t n, double exponent) : cdf_(n) {
        double total = 0.0;
        for (std::uint64_t r = 0; r < n; ++r) {
            total += std::pow(static_cast<double>(r + 1), -exponent);
            cdf_[r] = total;
        }
        for (double& c : cdf_) c /= total;
        cdf_.back() = 1.0;
    }

    std::uint64_t pick(double u) const {
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<std::uint64_t>(it == cdf_.end() ? cdf_.size() - 1
                                                           : it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

BlockData fresh_payload(rng::Stream& s, std::uint32_t block_bytes, double ones_density) {
    BlockData d(block_bytes, 0);
    for (std::uint32_t bit = 0; bit < block_bytes * 8; ++bit) {
        if (s.next_bernoulli(ones_density)) d[bit >> 3] |= std::uint8_t(1u << (bit & 7));
    }
    return d;
}

BlockData rewrite_payload(rng::Stream& s, const BlockData& old, double similarity,
                          double ones_density) {
    BlockData d(old.size(), 0);
    for (std::uint32_t bit = 0; bit < old.size() * 8; ++bit) {
        const bool keep = s.next_bernoulli(similarity);
        const bool v = keep ? data_bit(old, bit) : s.next_bernoulli(ones_density);
        if (v) d[bit >> 3] |= std::uint8_t(1u << (bit & 7));
    }
    return d;
}

} // namespace

void SyntheticSpec::validate() const {
    require(duration_ns > 0, "synthetic: duration_ns must be > 0");
    require(request_rate_per_us > 0.0, "synthetic: request_rate_per_us must be > 0");
    require(read_fraction >= 0.0 && read_fraction <= 1.0,
            "synthetic: read_fraction must be in [0,1]");
    require(working_set_blocks >= 1, "synthetic: working_set_blocks must be >= 1");
    require(zipf_exponent >= 0.0, "synthetic: zipf_exponent must be >= 0");
    require(ones_density >= 0.0 && ones_density <= 1.0,
            "synthetic: ones_density must be in [0,1]");
    require(rewrite_similarity >= 0.0 && rewrite_similarity <= 1.0,
            "synthetic: rewrite_similarity must be in [0,1]");
    const double est_records = static_cast<double>(duration_ns) / 1000.0 * request_rate_per_us +
                               static_cast<double>(working_set_blocks);
    require(est_records <= 5e7, "synthetic: spec would generate more than 5e7 records");
}

std::vector<AccessRecord> generate_trace(const SyntheticSpec& spec, std::uint32_t block_bytes,
                                         std::uint64_t seed) {
    spec.validate();
    require(block_bytes > 0, "synthetic: block_bytes must be > 0");

    std::vector<AccessRecord> out;
    rng::Stream s(seed, 0);
    const ZipfPicker zipf(spec.working_set_blocks, spec.zipf_exponent);
    std::unordered_map<std::uint64_t, BlockData> content;
    content.reserve(spec.working_set_blocks);

    std::int64_t t0 = 0;
    if (spec.initial_fill) {
        for (std::uint64_t b = 0; b < spec.working_set_blocks; ++b) {
            AccessRecord rec;
            rec.timestamp_ns = static_cast<std::int64_t>(b);
            rec.kind = AccessKind::Write;
            rec.address = b * block_bytes;
            rec.data = fresh_payload(s, block_bytes, spec.ones_density);
            content[b] = rec.data;
            out.push_back(std::move(rec));
        }
        t0 = static_cast<std::int64_t>(spec.working_set_blocks);
    }

    const double period_ns = 1000.0 / spec.request_rate_per_us;
    for (std::uint64_t k = 0;; ++k) {
        const auto offset = static_cast<std::int64_t>(
            std::llround(static_cast<double>(k) * period_ns));
        if (offset >= spec.duration_ns) break;

        AccessRecord rec;
        rec.timestamp_ns = t0 + offset;
        const std::uint64_t block = zipf.pick(s.next_open01());
        rec.address = block * block_bytes;

        if (s.next_bernoulli(spec.read_fraction)) {
            rec.kind = AccessKind::Read;
        } else {
            rec.kind = AccessKind::Write;
            const auto it = content.find(block);
            rec.data = it == content.end()
                           ? fresh_payload(s, block_bytes, spec.ones_density)
                           : rewrite_payload(s, it->second, spec.rewrite_similarity,
                                             spec.ones_density);
            content[block] = rec.data;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace sttsim
