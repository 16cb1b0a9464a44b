#include "sttsim/cache.hpp"

#include <bit>
#include <string>

#include "sttsim/errors.hpp"

namespace sttsim {

namespace {
constexpr double kNsToS = 1e-9;

std::uint64_t popcount_bytes(const BlockData& d) {
    std::uint64_t n = 0;
    for (std::uint8_t b : d)
        n += std::popcount(b);
    return n;
}
} // namespace

void CacheGeometry::validate() const {
    if (num_sets == 0 || !std::has_single_bit(num_sets))
        throw InvalidParameter("geometry: num_sets must be a power of two");
    if (associativity == 0)
        throw InvalidParameter("geometry: associativity must be >= 1");
    if (block_size_bits == 0 || block_size_bits % 8 != 0)
        throw InvalidParameter("geometry: block_size_bits must be a positive multiple of 8");
    if (!std::has_single_bit(block_bytes()))
        throw InvalidParameter("geometry: block byte size must be a power of two");
}

CacheModel::CacheModel(CacheGeometry geom, CacheOptions opt) : geom_(geom), opt_(opt) {
    geom_.validate();
    frames_.resize(geom_.num_frames());
}

CacheModel::Frame& CacheModel::frame_at(std::uint32_t set, std::uint32_t way) {
    return frames_[static_cast<std::size_t>(set) * geom_.associativity + way];
}

const CacheModel::Frame& CacheModel::frame_at(std::uint32_t set, std::uint32_t way) const {
    return frames_[static_cast<std::size_t>(set) * geom_.associativity + way];
}

std::uint64_t CacheModel::block_addr_of(std::uint64_t byte_addr) const {
    return byte_addr / geom_.block_bytes();
}

std::uint32_t CacheModel::set_of(std::uint64_t block_addr) const {
    return static_cast<std::uint32_t>(block_addr & (geom_.num_sets - 1));
}

std::optional<std::uint32_t> CacheModel::lookup(std::uint32_t set,
                                                std::uint64_t block_addr) const {
    for (std::uint32_t w = 0; w < geom_.associativity; ++w) {
        const Frame& f = frame_at(set, w);
        if (f.valid && f.block_addr == block_addr)
            return w;
    }
    return std::nullopt;
}

std::uint32_t CacheModel::pick_victim(std::uint32_t set) const {
    // Invalid way first, lowest index; otherwise smallest stamp (LRU tick or
    // FIFO install tick).
    std::uint32_t best = 0;
    std::uint64_t best_stamp = UINT64_MAX;
    for (std::uint32_t w = 0; w < geom_.associativity; ++w) {
        const Frame& f = frame_at(set, w);
        if (!f.valid)
            return w;
        if (f.stamp < best_stamp) {
            best_stamp = f.stamp;
            best = w;
        }
    }
    return best;
}

std::uint64_t CacheModel::count_ones(const BlockData& content) const {
    const std::uint64_t ones = popcount_bytes(content);
    return opt_.zero_vulnerable ? geom_.block_size_bits - ones : ones;
}

void CacheModel::ensure_per_bit(Frame& f) {
    if (!opt_.collect_per_bit || !f.per_bit_vul_ns.empty())
        return;
    const std::uint32_t n = geom_.block_size_bits;
    f.per_bit_vul_ns.assign(n, 0);
    f.per_bit_ones.assign(n, 0);
    f.per_bit_t01.assign(n, 0);
    f.per_bit_t10.assign(n, 0);
}

void CacheModel::add_idle_interval(Frame& f, std::int64_t now_ns, bool vulnerable) {
    if (now_ns < f.last_event_ns)
        throw InvalidParameter("cache: time regression (access at " + std::to_string(now_ns) +
                               " ns precedes block event at " + std::to_string(f.last_event_ns) +
                               " ns)");
    const std::uint64_t dt = static_cast<std::uint64_t>(now_ns - f.last_event_ns);
    f.all_ns += dt;
    if (vulnerable) {
        f.vul_ns += dt;
        if (opt_.collect_per_bit) {
            ensure_per_bit(f);
            for (auto& v : f.per_bit_vul_ns)
                v += dt;
        }
        if (opt_.collect_intervals)
            f.vul_intervals_ns.push_back(dt);
    }
}

void CacheModel::install(Frame& f, std::uint64_t block_addr, const BlockData& data,
                         std::int64_t now_ns) {
    // A fill writes the array from an all-zero baseline: the previous
    // resident's bits belong to a different address and cannot mask
    // transitions of the incoming block.
    f.valid = true;
    f.block_addr = block_addr;
    f.content = data;
    f.last_event_ns = now_ns;
    f.writes += 1;
    const std::uint64_t ones = popcount_bytes(data);
    f.t01 += ones;
    f.last_write_t01 = ones;
    f.last_write_t10 = 0;
    if (opt_.collect_per_bit) {
        ensure_per_bit(f);
        for (std::uint32_t i = 0; i < geom_.block_size_bits; ++i)
            if (data_bit(data, i))
                f.per_bit_t01[i] += 1;
    }
}

void CacheModel::write_into(Frame& f, const BlockData& payload, std::int64_t now_ns) {
    std::uint64_t t01 = 0, t10 = 0;
    if (opt_.collect_per_bit)
        ensure_per_bit(f);
    for (std::uint32_t i = 0; i < geom_.block_size_bits; ++i) {
        const bool oldb = data_bit(f.content, i);
        const bool newb = data_bit(payload, i);
        if (oldb == newb)
            continue;
        if (newb) {
            ++t01;
            if (opt_.collect_per_bit)
                f.per_bit_t01[i] += 1;
        } else {
            ++t10;
            if (opt_.collect_per_bit)
                f.per_bit_t10[i] += 1;
        }
    }
    f.t01 += t01;
    f.t10 += t10;
    f.last_write_t01 = t01;
    f.last_write_t10 = t10;
    f.content = payload;
    f.writes += 1;
    f.last_event_ns = now_ns;
}

void CacheModel::check_payload(const AccessRecord& rec) const {
    if (rec.data.size() != geom_.block_bytes())
        throw InvalidParameter("cache: payload length " + std::to_string(rec.data.size()) +
                               " bytes, expected " + std::to_string(geom_.block_bytes()));
}

AccessOutcome CacheModel::apply_access(const AccessRecord& rec) {
    const std::uint64_t baddr = block_addr_of(rec.address);
    const std::uint32_t set = set_of(baddr);
    AccessOutcome out;
    out.set_index = set;
    ++tick_;

    const auto way = lookup(set, baddr);

    switch (rec.kind) {
    case AccessKind::Read: {
        if (way) {
            Frame& f = frame_at(set, *way);
            add_idle_interval(f, rec.timestamp_ns, /*vulnerable=*/true);
            const std::uint64_t ones = count_ones(f.content);
            f.ones_read += ones;
            f.reads += 1;
            if (opt_.collect_per_bit) {
                ensure_per_bit(f);
                for (std::uint32_t i = 0; i < geom_.block_size_bits; ++i) {
                    const bool vulnerable = data_bit(f.content, i) != opt_.zero_vulnerable;
                    if (vulnerable)
                        f.per_bit_ones[i] += 1;
                }
            }
            if (opt_.collect_read_events)
                read_events_.push_back({set, *way,
                                        static_cast<double>(rec.timestamp_ns - f.last_event_ns) *
                                            kNsToS,
                                        ones, f.last_write_t01, f.last_write_t10});
            f.last_event_ns = rec.timestamp_ns;
            if (geom_.replacement == ReplacementPolicy::Lru)
                f.stamp = tick_;
            out.hit = true;
            out.way_index = *way;
        } else {
            // Miss: the refill is forwarded to the requester while it is
            // written into the array, so it counts as a baseline-zero write
            // and not as an array read.
            const std::uint32_t victim = pick_victim(set);
            Frame& f = frame_at(set, victim);
            if (f.valid) {
                add_idle_interval(f, rec.timestamp_ns, /*vulnerable=*/false);
                out.evicted = true;
            }
            auto it = backing_.find(baddr);
            const BlockData data =
                it != backing_.end() ? it->second : BlockData(geom_.block_bytes(), 0);
            install(f, baddr, data, rec.timestamp_ns);
            f.stamp = tick_;
            out.filled = true;
            out.way_index = victim;
        }
        break;
    }
    case AccessKind::Write: {
        check_payload(rec);
        backing_[baddr] = rec.data;
        if (way) {
            Frame& f = frame_at(set, *way);
            add_idle_interval(f, rec.timestamp_ns, /*vulnerable=*/false);
            write_into(f, rec.data, rec.timestamp_ns);
            if (geom_.replacement == ReplacementPolicy::Lru)
                f.stamp = tick_;
            out.hit = true;
            out.way_index = *way;
        } else {
            // Write-allocate; the fill and the write are one array write
            // from the all-zero baseline.
            const std::uint32_t victim = pick_victim(set);
            Frame& f = frame_at(set, victim);
            if (f.valid) {
                add_idle_interval(f, rec.timestamp_ns, /*vulnerable=*/false);
                out.evicted = true;
            }
            install(f, baddr, rec.data, rec.timestamp_ns);
            f.stamp = tick_;
            out.filled = true;
            out.way_index = victim;
        }
        break;
    }
    case AccessKind::Fill: {
        check_payload(rec);
        backing_[baddr] = rec.data;
        if (way) {
            Frame& f = frame_at(set, *way);
            add_idle_interval(f, rec.timestamp_ns, /*vulnerable=*/false);
            install(f, baddr, rec.data, rec.timestamp_ns);
            f.stamp = tick_;
            out.hit = true;
            out.filled = true;
            out.way_index = *way;
        } else {
            const std::uint32_t victim = pick_victim(set);
            Frame& f = frame_at(set, victim);
            if (f.valid) {
                add_idle_interval(f, rec.timestamp_ns, /*vulnerable=*/false);
                out.evicted = true;
            }
            install(f, baddr, rec.data, rec.timestamp_ns);
            f.stamp = tick_;
            out.filled = true;
            out.way_index = victim;
        }
        break;
    }
    case AccessKind::Evict: {
        if (way) {
            Frame& f = frame_at(set, *way);
            add_idle_interval(f, rec.timestamp_ns, /*vulnerable=*/false);
            f.valid = false;
            f.last_event_ns = rec.timestamp_ns;
            out.hit = true;
            out.evicted = true;
            out.way_index = *way;
        }
        break;
    }
    }
    return out;
}

CacheModel::FinalizeResult CacheModel::finalize(std::int64_t end_time_ns) const {
    FinalizeResult res;
    res.blocks.reserve(frames_.size());
    for (std::uint32_t set = 0; set < geom_.num_sets; ++set) {
        for (std::uint32_t wayi = 0; wayi < geom_.associativity; ++wayi) {
            const Frame& f = frame_at(set, wayi);
            if (f.valid && end_time_ns < f.last_event_ns)
                throw InvalidParameter("cache: finalize end time precedes a block event");

            BlockAccounting acc;
            acc.set_index = set;
            acc.way_index = wayi;
            // Trailing interval of a resident block is never followed by a
            // read here, so it is masked.
            const std::uint64_t trailing =
                f.valid ? static_cast<std::uint64_t>(end_time_ns - f.last_event_ns) : 0;
            acc.vulnerable_idle_time = static_cast<double>(f.vul_ns) * kNsToS;
            acc.all_idle_time = static_cast<double>(f.all_ns + trailing) * kNsToS;
            acc.ones_read_total = f.ones_read;
            acc.reads_total = f.reads;
            acc.writes_total = f.writes;
            acc.trans_0to1_total = f.t01;
            acc.trans_1to0_total = f.t10;
            if (opt_.collect_per_bit) {
                const std::uint32_t n = geom_.block_size_bits;
                if (f.per_bit_vul_ns.empty()) {
                    acc.per_bit_vulnerable_time.assign(n, 0.0);
                    acc.per_bit_ones_read.assign(n, 0);
                    acc.per_bit_trans_0to1.assign(n, 0);
                    acc.per_bit_trans_1to0.assign(n, 0);
                } else {
                    acc.per_bit_vulnerable_time.resize(n);
                    for (std::uint32_t i = 0; i < n; ++i)
                        acc.per_bit_vulnerable_time[i] =
                            static_cast<double>(f.per_bit_vul_ns[i]) * kNsToS;
                    acc.per_bit_ones_read = f.per_bit_ones;
                    acc.per_bit_trans_0to1 = f.per_bit_t01;
                    acc.per_bit_trans_1to0 = f.per_bit_t10;
                }
            }
            if (opt_.collect_intervals) {
                acc.vulnerable_intervals.reserve(f.vul_intervals_ns.size());
                for (std::uint64_t dt : f.vul_intervals_ns)
                    acc.vulnerable_intervals.push_back(static_cast<double>(dt) * kNsToS);
            }
            res.blocks.push_back(std::move(acc));
        }
    }
    res.t_exe = static_cast<double>(end_time_ns - start_time_ns_) * kNsToS;
    if (res.t_exe < 0.0)
        throw InvalidParameter("cache: finalize end time precedes start time");
    return res;
}

} // namespace sttsim
