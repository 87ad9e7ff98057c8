#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "posittrain/dataset.hpp"
#include "posittrain/rng.hpp"
#include "synthetic.hpp"

using namespace posittrain;

TEST_SUITE("data") {

TEST_CASE("minimal hand-built label file") {
    const std::vector<std::uint8_t> bytes{0, 0, 8, 1, 0, 0, 0, 2, 7, 2};
    const IdxArray a = parse_idx(bytes);
    CHECK(a.dtype == idx_dtype::kUByte);
    CHECK(a.dims == std::vector<std::uint32_t>{2});
    CHECK(a.payload == std::vector<std::uint8_t>{7, 2});
    CHECK(a.magic() == 0x00000801u);
}

TEST_CASE("truncated payload reports the offset where data ran out") {
    std::vector<std::uint8_t> bytes{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2};
    for (int i = 0; i < 5; ++i) bytes.push_back(static_cast<std::uint8_t>(i));
    try {
        parse_idx(bytes);
        FAIL("expected IdxParseError");
    } catch (const IdxParseError& e) {
        CHECK(e.offset() == 21);
    }
    try {
        parse_idx(std::vector<std::uint8_t>{0, 0, 8, 1, 0, 0});
        FAIL("expected IdxParseError");
    } catch (const IdxParseError& e) {
        CHECK(e.offset() == 6);
    }
}

TEST_CASE("bad magic and unsupported dtype") {
    try {
        parse_idx(std::vector<std::uint8_t>{0, 1, 8, 1, 0, 0, 0, 0});
        FAIL("expected IdxParseError");
    } catch (const IdxParseError& e) {
        CHECK(e.offset() == 1);
    }
    try {
        parse_idx(std::vector<std::uint8_t>{0, 0, 0x42, 1, 0, 0, 0, 0});
        FAIL("expected IdxParseError");
    } catch (const IdxParseError& e) {
        CHECK(e.offset() == 2);
    }
    CHECK_THROWS_AS(parse_idx(std::vector<std::uint8_t>{0, 0, 8, 1, 0, 0, 0, 1, 5, 6}), IdxParseError);
}

TEST_CASE("serialize and parse round-trip") {
    const auto rng = CounterRng::derive(1, Stream::Test, 50);
    for (std::uint8_t dtype : {idx_dtype::kUByte, idx_dtype::kShort, idx_dtype::kFloat, idx_dtype::kDouble}) {
        IdxArray a;
        a.dtype = dtype;
        a.dims = {3, 2, 5};
        a.payload.resize(a.element_count() * idx_dtype_size(dtype));
        for (std::size_t i = 0; i < a.payload.size(); ++i) a.payload[i] = static_cast<std::uint8_t>(rng.at(i));
        const auto bytes = serialize_idx(a);
        CHECK(parse_idx(bytes) == a);
        CHECK(serialize_idx(parse_idx(bytes)) == bytes);
    }
}

TEST_CASE("gzip files are inflated") {
    const auto dir = synthetic::temp_dir("idxgz");
    IdxArray a;
    a.dims = {4};
    a.payload = {1, 2, 3, 4};
    synthetic::write_gz(dir / "x.gz", serialize_idx(a));
    CHECK(read_idx_file(dir / "x.gz") == a);
    std::filesystem::remove_all(dir);
}

TEST_CASE("md5 digest") {
    const std::string text = "abc";
    CHECK(md5_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())) ==
          "900150983cd24fb0d6963f7d28e17f72");
}

TEST_CASE("loading a synthetic corpus") {
    const auto root = synthetic::temp_dir("corpus");
    synthetic::write_corpus(root, DatasetName::Mnist, 300, 100, 1, true);
    const auto data = load_dataset(DatasetName::Mnist, root);
    CHECK(data.train.size() == 300);
    CHECK(data.test.size() == 100);
    CHECK(data.train.features() == 784);
    CHECK_FALSE(data.warnings.empty());  // non-canonical sample counts
    for (std::size_t i = 0; i < 300; i += 37)
        for (std::size_t j = 0; j < 784; j += 101) {
            CHECK(data.train.pixel(i, j) >= 0.0);
            CHECK(data.train.pixel(i, j) <= 1.0);
        }
    const auto hist = data.train.label_histogram();
    CHECK(std::all_of(hist.begin(), hist.end(), [](std::size_t c) { return c > 0; }));
    CHECK_THROWS_AS(load_dataset(DatasetName::FashionMnist, root), DataError);
    std::filesystem::remove_all(root);
}

TEST_CASE("count disagreement between images and labels is an error") {
    const auto root = synthetic::temp_dir("mismatch");
    synthetic::write_corpus(root, DatasetName::Mnist, 50, 20, 2, false);
    IdxArray labels;
    labels.dims = {49};
    labels.payload.assign(49, 1);
    write_file_bytes(root / "mnist" / "train-labels-idx1-ubyte", serialize_idx(labels));
    CHECK_THROWS_AS(load_dataset(DatasetName::Mnist, root), DataError);
    std::filesystem::remove_all(root);
}

TEST_CASE("epoch permutations are deterministic bijections") {
    const auto a = epoch_permutation(1000, 42, 3);
    CHECK(a == epoch_permutation(1000, 42, 3));
    CHECK(a != epoch_permutation(1000, 42, 4));
    CHECK(a != epoch_permutation(1000, 43, 3));
    std::vector<std::uint32_t> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::uint32_t> expect(1000);
    std::iota(expect.begin(), expect.end(), 0u);
    CHECK(sorted == expect);
}

TEST_CASE("pixels are the exact format rounding of byte/255") {
    for (const auto& f : {NumericFormat::posit(16, 1), NumericFormat::posit(32, 2), NumericFormat::binary16(),
                          NumericFormat::binary32()}) {
        const auto table = pixel_table(f);
        with_arith(f, [&](const auto& ar) {
            for (unsigned b = 0; b < 256; ++b) {
                // b/255 is at least 2^-36 away from any tie point of these formats, far
                // more than the binary64 quotient's error, so its rounding is a valid oracle.
                CHECK(table[b] == ar.from_double(b / 255.0));
                CHECK(ar.to_double(table[b]) >= 0.0);
                CHECK(ar.to_double(table[b]) <= 1.0);
            }
        });
        CHECK(Scalar{f, table[255]}.to_double() == 1.0);
        CHECK(Scalar{f, table[0]}.to_double() == 0.0);
    }
}

TEST_CASE("batches cover the permuted dataset") {
    const auto root = synthetic::temp_dir("batches");
    synthetic::write_corpus(root, DatasetName::Mnist, 70, 10, 3, false);
    const auto data = load_dataset(DatasetName::Mnist, root);
    const NumericFormat f = NumericFormat::binary16();

    BatchStream whole(data.train, 70, 5, 0, f);
    CHECK(whole.batch_count() == 1);
    const auto only = whole.next();
    REQUIRE(only);
    CHECK_FALSE(whole.next());
    const auto order = epoch_permutation(70, 5, 0);
    for (std::size_t r = 0; r < 70; ++r) {
        CHECK(only->labels[r] == data.train.labels[order[r]]);
        CHECK(only->y.value(r, only->labels[r]) == 1.0);
        CHECK(only->x.value(r, 300) == Scalar::from_double(data.train.pixel(order[r], 300), f).to_double());
    }

    BatchStream parts(data.train, 32, 5, 0, f);
    CHECK(parts.batch_count() == 3);
    std::size_t rows = 0;
    while (auto b = parts.next()) rows += b->x.rows();
    CHECK(rows == 70);
    std::filesystem::remove_all(root);
}

}  // TEST_SUITE
