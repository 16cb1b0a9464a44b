#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "sttsim/errors.hpp"
#include "sttsim/synth.hpp"
#include "sttsim/trace.hpp"

using namespace sttsim;

namespace {

std::vector<AccessRecord> parse_text(const std::string& text, std::uint32_t block_bytes) {
    std::istringstream in(text);
    return parse_trace(in, block_bytes, "<test>");
}

std::string tmp_path(const std::string& name) {
    return std::string("/tmp/sttsim_trace_") + name;
}

} // namespace

TEST_CASE("parses a minimal read record") {
    const auto recs = parse_text("100 R 0x1f40\n", 64);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].timestamp_ns == 100);
    CHECK(recs[0].kind == AccessKind::Read);
    CHECK(recs[0].address == 0x1f40);
    CHECK(recs[0].data.empty());
}

TEST_CASE("parses writes with payload bytes in order") {
    const auto recs = parse_text("5 W 0x10 a1b2\n", 2);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].kind == AccessKind::Write);
    REQUIRE(recs[0].data.size() == 2);
    CHECK(recs[0].data[0] == 0xa1);
    CHECK(recs[0].data[1] == 0xb2);
}

TEST_CASE("address prefix is optional and case-insensitive") {
    const auto recs = parse_text("0 R 1f40\n1 R 0X1F40\n2 R 0x1f40\n", 8);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].address == 0x1f40);
    CHECK(recs[1].address == 0x1f40);
    CHECK(recs[2].address == 0x1f40);
}

TEST_CASE("comments and blank lines are skipped") {
    const auto recs = parse_text("# header comment\n"
                                 "\n"
                                 "100 R 0x0\n"
                                 "   \n"
                                 "200 W 0x2 beef # trailing comment\n"
                                 "# tail\n",
                                 2);
    REQUIRE(recs.size() == 2);
    CHECK(recs[1].data[0] == 0xbe);
    CHECK(recs[1].data[1] == 0xef);
}

TEST_CASE("malformed lines are rejected with their line number") {
    auto expect_line = [](const std::string& text, std::uint64_t line) {
        try {
            parse_text(text, 2);
            FAIL("expected TraceError for: " << text);
        } catch (const TraceError& e) {
            CHECK(e.line() == line);
            CHECK(std::string(e.what()).find("<test>") != std::string::npos);
        }
    };
    expect_line("abc R 0x0\n", 1);
    expect_line("-5 R 0x0\n", 1);
    expect_line("100 X 0x0\n", 1);
    expect_line("100 R\n", 1);
    expect_line("100 R 0xzz\n", 1);
    expect_line("100 R 0x0 beef\n", 1);    // reads carry no payload
    expect_line("100 W 0x0\n", 1);         // writes need one
    expect_line("100 W 0x0 be\n", 1);      // payload shorter than the block
    expect_line("100 W 0x0 beefbe\n", 1);  // longer
    expect_line("100 W 0x0 bxef\n", 1);    // non-hex payload
    expect_line("100 R 0x0 # ok\n100 R 0x0 extra junk\n", 2);
    expect_line("0 R 1fffffffffffffff0\n", 1); // address overflows 64 bits
    expect_line("999999999999999999999999 R 0x0\n", 1);
}

TEST_CASE("timestamp regressions name both lines") {
    try {
        parse_text("100 R 0x0\n# gap\n50 R 0x0\n", 2);
        FAIL("expected TraceError");
    } catch (const TraceError& e) {
        const std::string msg = e.what();
        CHECK(e.line() == 3);
        CHECK(msg.find("precedes") != std::string::npos);
        CHECK(msg.find("line 1") != std::string::npos);
    }
}

TEST_CASE("equal timestamps are allowed") {
    const auto recs = parse_text("100 R 0x0\n100 W 0x2 beef\n", 2);
    CHECK(recs.size() == 2);
}

TEST_CASE("serialize and parse round-trip exactly") {
    std::vector<AccessRecord> recs;
    recs.push_back({0, AccessKind::Write, 0x00, {0xde, 0xad}});
    recs.push_back({17, AccessKind::Read, 0x1f40, {}});
    recs.push_back({17, AccessKind::Write, 0xffc, {0x00, 0xff}});
    recs.push_back({250000, AccessKind::Read, 0x0, {}});

    const std::string text = serialize_trace(recs);
    const auto back = parse_text(text, 2);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].timestamp_ns == recs[i].timestamp_ns);
        CHECK(back[i].kind == recs[i].kind);
        CHECK(back[i].address == recs[i].address);
        CHECK(back[i].data == recs[i].data);
    }
    // serializing the reparsed records reproduces the text
    CHECK(serialize_trace(back) == text);
}

TEST_CASE("serializer refuses non-trace record kinds") {
    std::vector<AccessRecord> recs;
    recs.push_back({0, AccessKind::Fill, 0, {0x01, 0x02}});
    CHECK_THROWS_AS(serialize_trace(recs), InvalidParameter);
}

TEST_CASE("file round trip, plain and gzip") {
    std::vector<AccessRecord> recs;
    for (int i = 0; i < 500; ++i) {
        if (i % 3 == 0)
            recs.push_back({i * 10, AccessKind::Write, static_cast<std::uint64_t>(i % 7) * 2,
                            {static_cast<std::uint8_t>(i), 0x5a}});
        else
            recs.push_back({i * 10, AccessKind::Read, static_cast<std::uint64_t>(i % 7) * 2, {}});
    }

    for (const char* name : {"roundtrip.trace", "roundtrip.trace.gz"}) {
        const std::string path = tmp_path(name);
        save_trace(path, recs);
        const auto back = load_trace(path, 2);
        REQUIRE(back.size() == recs.size());
        for (std::size_t i = 0; i < recs.size(); ++i) {
            CHECK(back[i].timestamp_ns == recs[i].timestamp_ns);
            CHECK(back[i].kind == recs[i].kind);
            CHECK(back[i].address == recs[i].address);
            CHECK(back[i].data == recs[i].data);
        }
        std::remove(path.c_str());
    }
}

TEST_CASE("missing trace file raises a trace error") {
    CHECK_THROWS_AS(load_trace("/tmp/sttsim_no_such_file.trace", 2), TraceError);
}

TEST_CASE("generator is deterministic in the seed") {
    SyntheticSpec spec;
    spec.duration_ns = 100000;
    spec.working_set_blocks = 16;
    const auto a = generate_trace(spec, 8, 42);
    const auto b = generate_trace(spec, 8, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].timestamp_ns == b[i].timestamp_ns);
        CHECK(a[i].kind == b[i].kind);
        CHECK(a[i].address == b[i].address);
        CHECK(a[i].data == b[i].data);
    }
    const auto c = generate_trace(spec, 8, 43);
    bool differs = c.size() != a.size();
    for (std::size_t i = 0; !differs && i < a.size(); ++i)
        differs = a[i].kind != c[i].kind || a[i].address != c[i].address;
    CHECK(differs);
}

TEST_CASE("initial fill writes every working-set block once") {
    SyntheticSpec spec;
    spec.duration_ns = 10000;
    spec.working_set_blocks = 8;
    const auto recs = generate_trace(spec, 4, 1);
    REQUIRE(recs.size() > 8);
    for (std::uint64_t b = 0; b < 8; ++b) {
        CHECK(recs[b].kind == AccessKind::Write);
        CHECK(recs[b].timestamp_ns == static_cast<std::int64_t>(b));
        CHECK(recs[b].address == b * 4);
        CHECK(recs[b].data.size() == 4);
    }
    // steady phase follows at the fill end
    CHECK(recs[8].timestamp_ns == 8);

    SyntheticSpec nofill = spec;
    nofill.initial_fill = false;
    const auto bare = generate_trace(nofill, 4, 1);
    CHECK(bare[0].timestamp_ns == 0);
}

TEST_CASE("request rate sets the record count and spacing") {
    SyntheticSpec spec;
    spec.duration_ns = 100000;
    spec.request_rate_per_us = 10.0; // 100 ns period
    spec.working_set_blocks = 4;
    spec.initial_fill = false;
    const auto recs = generate_trace(spec, 4, 9);
    CHECK(recs.size() == 1000);
    CHECK(recs[1].timestamp_ns - recs[0].timestamp_ns == 100);
    CHECK(recs.back().timestamp_ns == 99900);
}

TEST_CASE("read fraction and ones density hit their targets") {
    SyntheticSpec spec;
    spec.duration_ns = 10'000'000; // 100k steady-state records
    spec.request_rate_per_us = 10.0;
    spec.read_fraction = 0.3;
    spec.ones_density = 0.4;
    spec.rewrite_similarity = 0.0;
    spec.working_set_blocks = 64;
    spec.initial_fill = false;
    const auto recs = generate_trace(spec, 8, 4);
    REQUIRE(recs.size() >= 100000);

    std::uint64_t reads = 0, ones = 0, bits = 0;
    for (const auto& r : recs) {
        if (r.kind == AccessKind::Read) {
            ++reads;
            continue;
        }
        for (std::uint32_t i = 0; i < 64; ++i)
            if (data_bit(r.data, i)) ++ones;
        bits += 64;
    }
    const double rf = static_cast<double>(reads) / static_cast<double>(recs.size());
    const double od = static_cast<double>(ones) / static_cast<double>(bits);
    CHECK(std::abs(rf - 0.3) < 0.01);
    CHECK(std::abs(od - 0.4) < 0.01);
}

TEST_CASE("degenerate fractions produce pure streams") {
    SyntheticSpec spec;
    spec.duration_ns = 50000;
    spec.working_set_blocks = 8;
    spec.read_fraction = 1.0;
    const auto reads = generate_trace(spec, 4, 2);
    for (std::size_t i = 8; i < reads.size(); ++i)
        CHECK(reads[i].kind == AccessKind::Read);

    spec.read_fraction = 0.0;
    spec.ones_density = 0.0;
    const auto writes = generate_trace(spec, 4, 2);
    for (const auto& r : writes) {
        CHECK(r.kind == AccessKind::Write);
        for (std::uint8_t byte : r.data)
            CHECK(byte == 0);
    }

    spec.ones_density = 1.0;
    const auto dense = generate_trace(spec, 4, 2);
    for (const auto& r : dense)
        for (std::uint8_t byte : r.data)
            CHECK(byte == 0xff);
}

TEST_CASE("full rewrite similarity repeats block content") {
    SyntheticSpec spec;
    spec.duration_ns = 50000;
    spec.working_set_blocks = 4;
    spec.read_fraction = 0.0;
    spec.rewrite_similarity = 1.0;
    const auto recs = generate_trace(spec, 4, 6);
    std::vector<BlockData> first(4);
    for (const auto& r : recs) {
        const std::uint64_t b = r.address / 4;
        if (first[b].empty())
            first[b] = r.data;
        else
            CHECK(r.data == first[b]);
    }
}

TEST_CASE("zipf exponent skews block popularity") {
    SyntheticSpec spec;
    spec.duration_ns = 1'000'000;
    spec.working_set_blocks = 64;
    spec.zipf_exponent = 1.2;
    spec.initial_fill = false;
    const auto recs = generate_trace(spec, 4, 3);
    std::vector<std::uint64_t> counts(64, 0);
    for (const auto& r : recs)
        ++counts[r.address / 4];
    CHECK(counts[0] > 4 * counts[63]);

    spec.zipf_exponent = 0.0;
    const auto uniform = generate_trace(spec, 4, 3);
    std::vector<std::uint64_t> ucounts(64, 0);
    for (const auto& r : uniform)
        ++ucounts[r.address / 4];
    const double expect = static_cast<double>(uniform.size()) / 64.0;
    CHECK(static_cast<double>(ucounts[0]) < 1.5 * expect);
    CHECK(static_cast<double>(ucounts[63]) > 0.5 * expect);
}

TEST_CASE("spec validation") {
    SyntheticSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.duration_ns = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = SyntheticSpec{};
    spec.request_rate_per_us = -1.0;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = SyntheticSpec{};
    spec.read_fraction = 1.5;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = SyntheticSpec{};
    spec.working_set_blocks = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = SyntheticSpec{};
    spec.zipf_exponent = -0.1;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = SyntheticSpec{};
    spec.ones_density = -0.5;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = SyntheticSpec{};
    spec.rewrite_similarity = 2.0;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = SyntheticSpec{};
    spec.duration_ns = 1'000'000'000;
    spec.request_rate_per_us = 1000.0; // would emit 1e9 records
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
}
