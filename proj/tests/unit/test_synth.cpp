#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "glyph_forge.hpp"
#include "oracles.hpp"
#include "overseg/dataset_io.hpp"
#include "overseg/errors.hpp"
#include "overseg/synth.hpp"
#include "test_util.hpp"

using namespace overseg;

namespace {

const ClassPool& shared_pool() {
    static const ClassPool pool = overseg::testing::forge_corpus({.per_label = 30, .seed = 21}).all();
    return pool;
}

std::string serialize(const Dataset& d) {
    std::ostringstream out;
    write_dataset(d, out);
    return out.str();
}

Dataset deserialize(const std::string& bytes) {
    std::istringstream in(bytes);
    return read_dataset(in);
}

}  // namespace

TEST_CASE("derive_seed matches a reference splitmix64") {
    std::uint64_t state = 0;
    const std::uint64_t reference = oracle::splitmix64_next(state);
    CHECK(derive_seed(0, 0) == reference);
    CHECK(derive_seed(0, 0) == 0xE220A8397B1DCDAFULL);  // frozen regression constant
    CHECK(derive_seed(123, 456) == derive_seed(123, 456));

    Xoshiro256 rng(99);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t s = rng.next();
        std::uint64_t st = s ^ (5 * kGoldenGamma);
        CHECK(derive_seed(s, 5) == oracle::splitmix64_next(st));
        CHECK(derive_seed(s, 0) != derive_seed(s, 1));
    }
}

TEST_CASE("Xoshiro256 draw helpers stay in range") {
    Xoshiro256 rng(5);
    std::array<int, 7> hist{};
    for (int i = 0; i < 70000; ++i) {
        const auto v = rng.uniform_int(-3, 3);
        REQUIRE(v >= -3);
        REQUIRE(v <= 3);
        ++hist[static_cast<std::size_t>(v + 3)];
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    for (int count : hist) CHECK(std::abs(count - 10000) < 500);
    Xoshiro256 a(17), b(17);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("translate") {
    Xoshiro256 rng(1);
    const auto img = overseg::testing::random_image(rng, 6, 5);
    CHECK(translate(img, 0, 0) == img);
    CHECK(translate(GrayImage(4, 4), 2, -3) == GrayImage(4, 4));

    GrayImage dot(3, 3);
    dot.at(1, 1) = 1.0f;
    const auto moved = translate(dot, 1, 0);
    CHECK(moved.at(1, 2) == 1.0f);
    CHECK(moved.at(1, 1) == 0.0f);
    CHECK(translate(dot, 2, 0) == GrayImage(3, 3));  // shifted off canvas

    const auto shifted = translate(img, -2, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 5; ++x) {
            const int sy = y - 1, sx = x + 2;
            const float expect = sy >= 0 && sy < 6 && sx >= 0 && sx < 5 ? img.at(sy, sx) : 0.0f;
            CHECK(shifted.at(y, x) == expect);
        }
    const auto mask = binarize_mask(img, 0.5);
    CHECK(translate(mask, -2, 1) == binarize_mask(shifted, 0.5));
}

TEST_CASE("composite is an opaque max with scaled under-letter") {
    GrayImage under(1, 1, {0.8f}), upper(1, 1, {0.3f});
    CHECK(composite(under, upper, 0.5).at(0, 0) == doctest::Approx(0.4));
    CHECK_THROWS_AS(composite(GrayImage(2, 2), GrayImage(2, 3), 1.0), ArgumentError);

    Xoshiro256 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = overseg::testing::random_image(rng, 5, 7, 0.4);
        const auto b = overseg::testing::random_image(rng, 5, 7, 0.4);
        const double c = rng.uniform(0.05, 1.0);
        CHECK(composite(a, b, 1.0) == composite(b, a, 1.0));
        CHECK(composite(a, GrayImage(5, 7), c) == scale_intensity(a, c));
        CHECK(composite(GrayImage(5, 7), b, c) == b);
        CHECK(composite(a, GrayImage(5, 7), 1.0) == a);
    }
}

TEST_CASE("add_gaussian_noise") {
    Xoshiro256 rng(3);
    const auto img = overseg::testing::random_image(rng, 10, 10);
    CHECK(add_gaussian_noise(img, 0.0, rng) == img);
    CHECK_THROWS_AS(add_gaussian_noise(img, -1.0, rng), ArgumentError);

    const auto noisy = add_gaussian_noise(GrayImage(100, 100), 0.5, rng);
    for (float p : noisy.pixels()) {
        REQUIRE(p >= 0.0f);
        REQUIRE(p <= 1.0f);
    }

    // Monte-Carlo statistics on mid-gray, where clipping never triggers.
    GrayImage gray(1000, 100, std::vector<float>(100000, 0.5f));
    const auto out = add_gaussian_noise(gray, 0.05, rng);
    double sum = 0, sq = 0;
    for (float p : out.pixels()) {
        const double d = p - 0.5;
        sum += d;
        sq += d * d;
    }
    const double mean = sum / 1e5;
    const double stddev = std::sqrt(sq / 1e5 - mean * mean);
    CHECK(std::abs(mean) <= 0.002);
    CHECK(std::abs(stddev - 0.05) <= 0.05 * 0.05);
}

TEST_CASE("make_sample singletons when p_single = 1") {
    SynthConfig config;
    config.p_single = 1.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto s = make_sample(shared_pool(), config, derive_seed(1, i));
        CHECK_FALSE(s.is_pair());
        int nonzero = 0;
        for (const auto& m : s.masks) nonzero += !m.empty_ink();
        CHECK(nonzero == 1);
        CHECK_FALSE(s.masks[s.class_a].empty_ink());
    }
}

TEST_CASE("make_sample is deterministic") {
    SynthConfig config;
    config.noise_sigma = 0.05;
    for (std::uint64_t i = 0; i < 50; ++i)
        CHECK(make_sample(shared_pool(), config, derive_seed(9, i)) == make_sample(shared_pool(), config, derive_seed(9, i)));
}

TEST_CASE("make_sample singleton rate and distinct pairs (brute-force scan)") {
    SynthConfig config;  // p_single = 0.1
    std::size_t singles = 0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const auto s = make_sample(shared_pool(), config, derive_seed(2024, i));
        if (!s.is_pair()) {
            ++singles;
            continue;
        }
        REQUIRE(*s.class_b != s.class_a);
    }
    CHECK(std::abs(static_cast<double>(singles) / 10000.0 - 0.1) <= 0.01);
}

TEST_CASE("generated samples satisfy the mask and intensity invariants") {
    SynthConfig config;
    config.contrast_min = 0.5;
    config.contrast_max = 1.0;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto s = make_sample(shared_pool(), config, derive_seed(55, i));
        CHECK(s.contrast >= 0.5);
        CHECK(s.contrast <= 1.0);
        const auto truth = s.truth_set();
        for (int c = 0; c < config.n_classes(); ++c)
            if (std::find(truth.begin(), truth.end(), c) == truth.end()) CHECK(s.masks[c].empty_ink());
        if (!s.is_pair()) continue;
        const auto& under = s.masks[s.class_a];
        const auto& upper = s.masks[*s.class_b];
        CHECK(under.ink_count() >= static_cast<std::size_t>(config.min_ink_pixels));
        CHECK(upper.ink_count() >= static_cast<std::size_t>(config.min_ink_pixels));
        CHECK(ink_bounds(under).intersects(ink_bounds(upper)));
        for (std::size_t p = 0; p < s.input.size(); ++p) {
            if (upper.bits()[p]) REQUIRE(s.input.pixels()[p] >= config.mask_threshold);
            if (under.bits()[p]) REQUIRE(s.input.pixels()[p] >= s.contrast * config.mask_threshold - 1e-6);
        }
    }
}

TEST_CASE("make_sample gives up with the sample index after 100 placements") {
    ClassPool pool(2);
    GrayImage tiny(28, 28);
    tiny.at(0, 0) = 1.0f;
    for (auto& list : pool) list.push_back({0, tiny, binarize_mask(tiny, 0.5)});
    SynthConfig config;
    config.class_set = {0, 1};
    config.p_single = 0.0;
    try {
        make_sample(pool, config, 1, 37);
        FAIL("expected GenerationError");
    } catch (const GenerationError& e) {
        CHECK(e.sample_index() == 37);
    }
}

TEST_CASE("generate_dataset") {
    SynthConfig config;
    const auto one = generate_dataset(shared_pool(), config, 1, 77);
    REQUIRE(one.size() == 1);
    CHECK(one.samples[0] == make_sample(shared_pool(), config, derive_seed(77, 0)));
    CHECK_THROWS_AS(generate_dataset(shared_pool(), config, 0, 77), ArgumentError);

    config.noise_sigma = 0.05;
    const auto seq = generate_dataset(shared_pool(), config, 1000, 31, 1);
    const auto par = generate_dataset(shared_pool(), config, 1000, 31, 4);
    CHECK(serialize(seq) == serialize(par));
}

TEST_CASE("OVLS round trip and size arithmetic") {
    SynthConfig config;
    config.noise_sigma = 0.03;
    const auto d = generate_dataset(shared_pool(), config, 10, 5);
    const auto bytes = serialize(d);
    const auto back = deserialize(bytes);
    const auto q = quantize(d);
    CHECK(back.samples == q.samples);
    CHECK(back.global_seed == d.global_seed);
    CHECK(back.n_classes() == 5);
    CHECK(serialize(back) == bytes);
    CHECK(quantize(q).samples == q.samples);

    for (std::size_t n : {1u, 7u, 100u}) {
        const auto bytes_n = serialize(generate_dataset(shared_pool(), config, n, 5));
        // 26-byte header; 14 metadata + 784 pixels + 5 x 98 packed mask bytes per sample
        CHECK(bytes_n.size() == 26 + n * (14 + 784 + 5 * 98));
        CHECK(bytes_n.size() == dataset_file_size(n, 28, 28, 5));
    }
}

TEST_CASE("OVLS format errors carry byte offsets") {
    const auto bytes = serialize(generate_dataset(shared_pool(), SynthConfig{}, 3, 5));
    auto expect_offset = [](const std::string& b, std::uint64_t offset) {
        try {
            deserialize(b);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.position() == offset);
        }
    };
    std::string bad = bytes;
    bad.replace(0, 4, "XXXX");
    expect_offset(bad, 0);
    bad = bytes;
    bad[4] = 2;
    expect_offset(bad, 4);
    expect_offset(bytes.substr(0, 10), 10);  // offset of the field that was cut
    expect_offset(bytes.substr(0, 26 + 5), 26 + 4);
    expect_offset(bytes + "Z", bytes.size());
    bad = bytes;
    bad[26] = 9;  // class_a out of range
    expect_offset(bad, 26);
}

TEST_CASE("OVLS reader survives arbitrary corruption") {
    const auto bytes = serialize(generate_dataset(shared_pool(), SynthConfig{}, 4, 5));
    Xoshiro256 rng(4242);
    for (int trial = 0; trial < 300; ++trial) {
        std::string b = bytes;
        if (trial % 2) {
            b.resize(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(b.size()) - 1)));
        } else {
            for (int k = 0; k < 3; ++k)
                b[static_cast<std::size_t>(rng.uniform_int(0, 40))] = static_cast<char>(rng.uniform_int(0, 255));
        }
        try {
            deserialize(b);
        } catch (const FormatError&) {
        } catch (const std::exception& e) {
            FAIL("unexpected exception: " << e.what());
        }
    }
}
