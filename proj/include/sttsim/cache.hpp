#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

// Set-associative cache model that replays an access trace and harvests,
// per block frame, every counter the reliability formulas consume:
// vulnerable idle time (idle intervals ended by a read), total idle time,
// ones-read counts and directional transition counts.
//
// Masking rule: an idle interval ended by a write is overwritten and never
// manifests, so it counts toward all_idle_time only. Intervals ended by an
// eviction and the trailing interval at end of simulation are masked the
// same way, because without a subsequent read the error never manifests.
//
// Timestamps are integer nanoseconds; interval sums stay in integers until
// finalize() converts them to seconds, so splitting an interval across
// accesses reproduces bit-identical totals.

namespace sttsim {

enum class ReplacementPolicy { Lru, Fifo };

struct CacheGeometry {
    std::uint32_t num_sets = 0;
    std::uint32_t associativity = 0;
    std::uint32_t block_size_bits = 0; ///< N, bits per block (8 * block bytes)
    ReplacementPolicy replacement = ReplacementPolicy::Lru;

    std::uint32_t block_bytes() const { return block_size_bits / 8; }
    std::uint64_t num_frames() const {
        return static_cast<std::uint64_t>(num_sets) * associativity;
    }
    std::uint64_t num_cells() const { return num_frames() * block_size_bits; }

    /// num_sets a power of two, block size a positive multiple of 8 bits with
    /// a power-of-two byte count, associativity >= 1.
    void validate() const;
};

enum class AccessKind { Read, Write, Fill, Evict };

/// Block content, one byte per 8 bits; bit i lives at byte i/8, bit i%8.
using BlockData = std::vector<std::uint8_t>;

inline bool data_bit(const BlockData& d, std::uint32_t i) {
    return (d[i >> 3] >> (i & 7)) & 1u;
}

struct AccessRecord {
    std::int64_t timestamp_ns = 0;
    AccessKind kind = AccessKind::Read;
    std::uint64_t address = 0; ///< byte address; low bits below block size are masked
    BlockData data;            ///< block-sized payload, required for Write/Fill
};

/// Per-frame counters harvested from the trace, in seconds / plain counts.
struct BlockAccounting {
    std::uint32_t set_index = 0;
    std::uint32_t way_index = 0;

    double vulnerable_idle_time = 0.0; ///< s, sum of idle intervals ended by a read
    double all_idle_time = 0.0;        ///< s, sum over all idle intervals
    std::uint64_t ones_read_total = 0; ///< sum over reads of vulnerable-bit count
    std::uint64_t reads_total = 0;
    std::uint64_t writes_total = 0;
    std::uint64_t trans_0to1_total = 0;
    std::uint64_t trans_1to0_total = 0;

    // Per-bit views, collected when CacheOptions::collect_per_bit is set.
    // per_bit_vulnerable_time[i] equals vulnerable_idle_time for every bit
    // (block-granularity access); the count vectors sum to their totals.
    std::vector<double> per_bit_vulnerable_time;
    std::vector<std::uint32_t> per_bit_ones_read;
    std::vector<std::uint32_t> per_bit_trans_0to1;
    std::vector<std::uint32_t> per_bit_trans_1to0;

    /// Individual vulnerable intervals (s), oldest first; collected when
    /// CacheOptions::collect_intervals is set (fault-injection oracle input).
    std::vector<double> vulnerable_intervals;
};

struct AccessOutcome {
    bool hit = false;
    bool filled = false;  ///< a fill installed data into the frame
    bool evicted = false; ///< a valid block was displaced or invalidated
    std::uint32_t set_index = 0;
    std::uint32_t way_index = 0;
};

/// Snapshot taken at each read hit, for per-read error integration:
/// the idle interval this read terminates, the vulnerable-bit count it
/// observes, and the transition counts of the frame's most recent write.
struct ReadEventRecord {
    std::uint32_t set_index = 0;
    std::uint32_t way_index = 0;
    double idle_interval = 0.0; ///< s
    std::uint64_t ones = 0;
    std::uint64_t last_write_0to1 = 0;
    std::uint64_t last_write_1to0 = 0;
};

struct CacheOptions {
    bool collect_per_bit = false;
    bool collect_intervals = false;
    bool collect_read_events = false;
    /// Read current is in the '1'-write direction, making '0' cells the
    /// vulnerable ones. Default: '1' cells vulnerable.
    bool zero_vulnerable = false;
};

class CacheModel {
public:
    explicit CacheModel(CacheGeometry geom, CacheOptions opt = {});

    const CacheGeometry& geometry() const { return geom_; }
    const CacheOptions& options() const { return opt_; }

    /// Simulation start (ns); t_exe is measured from here. Default 0.
    void set_start_time_ns(std::int64_t t) { start_time_ns_ = t; }

    AccessOutcome apply_access(const AccessRecord& rec);

    /// Vulnerable-bit count of a block under the configured read direction.
    std::uint64_t count_ones(const BlockData& content) const;

    struct FinalizeResult {
        std::vector<BlockAccounting> blocks; ///< one per frame, set-major
        double t_exe = 0.0;                  ///< s
    };

    /// Closes the books at end_time: trailing intervals of resident blocks
    /// are masked (counted in all_idle_time only). Non-destructive; the
    /// model can keep replaying afterwards.
    FinalizeResult finalize(std::int64_t end_time_ns) const;

    const std::vector<ReadEventRecord>& read_events() const { return read_events_; }

private:
    struct Frame {
        bool valid = false;
        std::uint64_t block_addr = 0;
        BlockData content;
        std::int64_t last_event_ns = 0;
        std::uint64_t stamp = 0; ///< LRU: last touch tick; FIFO: install tick

        std::uint64_t vul_ns = 0;
        std::uint64_t all_ns = 0;
        std::uint64_t ones_read = 0;
        std::uint64_t reads = 0;
        std::uint64_t writes = 0;
        std::uint64_t t01 = 0;
        std::uint64_t t10 = 0;
        std::uint64_t last_write_t01 = 0;
        std::uint64_t last_write_t10 = 0;

        std::vector<std::uint64_t> per_bit_vul_ns;
        std::vector<std::uint32_t> per_bit_ones;
        std::vector<std::uint32_t> per_bit_t01;
        std::vector<std::uint32_t> per_bit_t10;
        std::vector<std::uint64_t> vul_intervals_ns;
    };

    Frame& frame_at(std::uint32_t set, std::uint32_t way);
    const Frame& frame_at(std::uint32_t set, std::uint32_t way) const;
    std::uint64_t block_addr_of(std::uint64_t byte_addr) const;
    std::uint32_t set_of(std::uint64_t block_addr) const;
    std::optional<std::uint32_t> lookup(std::uint32_t set, std::uint64_t block_addr) const;
    std::uint32_t pick_victim(std::uint32_t set) const;

    void add_idle_interval(Frame& f, std::int64_t now_ns, bool vulnerable);
    void install(Frame& f, std::uint64_t block_addr, const BlockData& data, std::int64_t now_ns);
    void write_into(Frame& f, const BlockData& payload, std::int64_t now_ns);
    void ensure_per_bit(Frame& f);
    void check_payload(const AccessRecord& rec) const;

    CacheGeometry geom_;
    CacheOptions opt_;
    std::vector<Frame> frames_;
    std::unordered_map<std::uint64_t, BlockData> backing_; ///< lower-level data image
    std::uint64_t tick_ = 0;
    std::int64_t start_time_ns_ = 0;
    std::vector<ReadEventRecord> read_events_;
};

} // namespace sttsim
