#include "posittrain/dataset.hpp"

#include <cstdlib>
#include <map>
#include <numeric>

#include "posittrain/rng.hpp"

namespace posittrain {

std::string to_string(DatasetName name) { return name == DatasetName::Mnist ? "mnist" : "fashion-mnist"; }

DatasetName parse_dataset_name(const std::string& text) {
    if (text == "mnist") return DatasetName::Mnist;
    if (text == "fashion-mnist") return DatasetName::FashionMnist;
    throw std::invalid_argument("unknown dataset '" + text + "' (expected mnist or fashion-mnist)");
}

Dataset Dataset::head(std::size_t n) const {
    if (n >= size()) return *this;
    Dataset out = *this;
    out.labels.resize(n);
    out.pixels.resize(n * features());
    return out;
}

std::array<std::size_t, kNumClasses> Dataset::label_histogram() const {
    std::array<std::size_t, kNumClasses> h{};
    for (auto l : labels) ++h[l];
    return h;
}

Dataset Dataset::from_idx(const IdxArray& images, const IdxArray& labels, Split split) {
    if (images.dtype != idx_dtype::kUByte || images.dims.size() != 3)
        throw DataError("image file must have magic 0x00000803, got 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%08X", images.magic());
            return std::string(buf);
        }());
    if (labels.dtype != idx_dtype::kUByte || labels.dims.size() != 1)
        throw DataError("label file must have magic 0x00000801");
    if (images.dims[0] != labels.dims[0])
        throw DataError("image count " + std::to_string(images.dims[0]) + " disagrees with label count " +
                        std::to_string(labels.dims[0]));
    Dataset ds;
    ds.split = split;
    ds.image_rows = images.dims[1];
    ds.image_cols = images.dims[2];
    ds.pixels = images.payload;
    ds.labels = labels.payload;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (ds.labels[i] >= kNumClasses)
            throw DataError("label " + std::to_string(ds.labels[i]) + " out of range at sample " + std::to_string(i));
    return ds;
}

std::filesystem::path default_data_root() {
    if (const char* env = std::getenv("POSIT_TRAIN_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return "data";
}

namespace {

struct FileSpec {
    const char* name;
    std::size_t raw_size;
};

constexpr FileSpec kTrainImages{"train-images-idx3-ubyte", 47040016};
constexpr FileSpec kTrainLabels{"train-labels-idx1-ubyte", 60008};
constexpr FileSpec kTestImages{"t10k-images-idx3-ubyte", 7840016};
constexpr FileSpec kTestLabels{"t10k-labels-idx1-ubyte", 10008};

// MD5 of the gzip archives as distributed.
const std::map<std::string, std::string>& gz_checksums(DatasetName name) {
    static const std::map<std::string, std::string> mnist{
        {"train-images-idx3-ubyte", "f68b3c2dcbeaaa9fbdd348bbdeb94873"},
        {"train-labels-idx1-ubyte", "d53e105ee54ea40749a09fcbcd1e9432"},
        {"t10k-images-idx3-ubyte", "9fb629c4189551a2d022fa330f9573f3"},
        {"t10k-labels-idx1-ubyte", "ec29112dd5afa0611ce80d1b7f02629c"}};
    static const std::map<std::string, std::string> fashion{
        {"train-images-idx3-ubyte", "8d4fb7e6c68d591d4c3dfef9ec88bf0d"},
        {"train-labels-idx1-ubyte", "25c81989df183df01b3e8a0aad5dffbe"},
        {"t10k-images-idx3-ubyte", "bef4ecab320f06d8554ea6380940ec79"},
        {"t10k-labels-idx1-ubyte", "bb300cfdad3c16e7a12a480ee83cd310"}};
    return name == DatasetName::Mnist ? mnist : fashion;
}

IdxArray load_file(DatasetName name, const std::filesystem::path& dir, const FileSpec& spec,
                   std::vector<std::string>& warnings) {
    const auto plain = dir / spec.name;
    const auto gz = dir / (std::string(spec.name) + ".gz");
    std::filesystem::path source;
    std::vector<std::uint8_t> bytes;
    if (std::filesystem::exists(plain)) {
        source = plain;
        bytes = read_file_bytes(plain);
        if (bytes.size() != spec.raw_size)
            warnings.push_back(plain.string() + ": size " + std::to_string(bytes.size()) + " differs from the " +
                               std::to_string(spec.raw_size) + " bytes of the published file");
    } else if (std::filesystem::exists(gz)) {
        source = gz;
        const auto packed = read_file_bytes(gz);
        const std::string digest = md5_hex(packed);
        const std::string& expected = gz_checksums(name).at(spec.name);
        if (digest != expected)
            warnings.push_back(gz.string() + ": MD5 " + digest + " does not match published " + expected);
        try {
            bytes = gunzip(packed);
        } catch (const std::runtime_error& e) {
            throw DataError(gz.string() + ": " + e.what());
        }
    } else {
        throw DataError("missing dataset file " + plain.string() + " (or .gz)");
    }
    try {
        return parse_idx(bytes);
    } catch (const IdxParseError& e) {
        throw DataError(source.string() + ": " + e.what());
    }
}

}  // namespace

LoadedDataset load_dataset(DatasetName name, const std::filesystem::path& root) {
    const auto dir = root / to_string(name);
    LoadedDataset out;
    const auto train_images = load_file(name, dir, kTrainImages, out.warnings);
    const auto train_labels = load_file(name, dir, kTrainLabels, out.warnings);
    const auto test_images = load_file(name, dir, kTestImages, out.warnings);
    const auto test_labels = load_file(name, dir, kTestLabels, out.warnings);
    out.train = Dataset::from_idx(train_images, train_labels, Split::Train);
    out.test = Dataset::from_idx(test_images, test_labels, Split::Test);

    const auto check_split = [&](const Dataset& ds, std::size_t expected, const char* what) {
        if (ds.size() != expected) {
            out.warnings.push_back(std::string(what) + " split has " + std::to_string(ds.size()) +
                                   " samples; the published corpus has " + std::to_string(expected));
        }
        const auto hist = ds.label_histogram();
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (hist[c] != 0) continue;
            const std::string msg = std::string(what) + " split has no samples of class " + std::to_string(c);
            if (ds.size() == expected) throw DataError(msg);
            out.warnings.push_back(msg);
        }
    };
    check_split(out.train, 60000, "train");
    check_split(out.test, 10000, "test");
    return out;
}

std::vector<std::uint32_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    const auto rng = CounterRng::derive(seed, Stream::Shuffle, epoch);
    for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[rng.below(i, i + 1)]);
    return order;
}

std::array<std::uint32_t, 256> pixel_table(const NumericFormat& format) {
    std::array<std::uint32_t, 256> table{};
    const ExactReal denom = ExactReal::from_scaled(false, 255, 0);
    with_arith(format, [&](const auto& ar) {
        for (unsigned b = 0; b < 256; ++b)
            table[b] = ar.round_exact(exact_div(ExactReal::from_scaled(false, b, 0), denom, 96));
    });
    return table;
}

Batch make_batch(const Dataset& ds, std::span<const std::uint32_t> indices, const NumericFormat& format,
                 const std::array<std::uint32_t, 256>& pixels) {
    const std::size_t f = ds.features();
    std::vector<std::uint32_t> x(indices.size() * f);
    std::vector<std::uint32_t> y(indices.size() * kNumClasses, 0);
    std::vector<std::uint8_t> labels(indices.size());
    const std::uint32_t one = Scalar::from_double(1.0, format).bits;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const std::uint8_t* src = ds.pixels.data() + std::size_t{indices[r]} * f;
        for (std::size_t j = 0; j < f; ++j) x[r * f + j] = pixels[src[j]];
        labels[r] = ds.labels[indices[r]];
        y[r * kNumClasses + labels[r]] = one;
    }
    return Batch{Tensor({indices.size(), f}, format, std::move(x)),
                 Tensor({indices.size(), kNumClasses}, format, std::move(y)), std::move(labels)};
}

BatchStream::BatchStream(const Dataset& ds, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch,
                         NumericFormat format)
    : ds_(&ds),
      batch_size_(batch_size),
      format_(format),
      pixels_(pixel_table(format)),
      order_(epoch_permutation(ds.size(), seed, epoch)) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
}

std::optional<Batch> BatchStream::next() {
    if (cursor_ >= order_.size()) return std::nullopt;
    const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
    Batch b = make_batch(*ds_, std::span(order_).subspan(cursor_, end - cursor_), format_, pixels_);
    cursor_ = end;
    return b;
}

}  // namespace posittrain
