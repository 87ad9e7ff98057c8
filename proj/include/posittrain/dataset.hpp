#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "posittrain/idx.hpp"
#include "posittrain/tensor.hpp"

namespace posittrain {

enum class DatasetName : std::uint8_t { Mnist, FashionMnist };
enum class Split : std::uint8_t { Train, Test };

std::string to_string(DatasetName name);  // "mnist" | "fashion-mnist"
DatasetName parse_dataset_name(const std::string& text);

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kNumClasses = 10;

/// Images kept as raw bytes; the normalized pixel is byte / 255.
struct Dataset {
    Split split = Split::Train;
    std::size_t image_rows = 28;
    std::size_t image_cols = 28;
    std::vector<std::uint8_t> pixels;  // size() × features()
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return labels.size(); }
    std::size_t features() const { return image_rows * image_cols; }
    double pixel(std::size_t sample, std::size_t feature) const {
        return pixels[sample * features() + feature] / 255.0;
    }
    /// First `n` samples (all when n >= size()).
    Dataset head(std::size_t n) const;
    std::array<std::size_t, kNumClasses> label_histogram() const;

    /// Validates an images (ubyte, 3-D) / labels (ubyte, 1-D) pair.
    static Dataset from_idx(const IdxArray& images, const IdxArray& labels, Split split);
};

struct LoadedDataset {
    Dataset train;
    Dataset test;
    std::vector<std::string> warnings;  // checksum, size and count deviations
};

/// `$POSIT_TRAIN_DATA_DIR` if set, else "./data".
std::filesystem::path default_data_root();
/// <root>/<name>/{train,t10k}-{images,labels}-idx?-ubyte[.gz]
LoadedDataset load_dataset(DatasetName name, const std::filesystem::path& root);

/// Bijection on 0..n-1 from a Fisher-Yates shuffle keyed by (seed, epoch).
std::vector<std::uint32_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::uint64_t epoch);

/// Exact format rounding of byte / 255 for every byte.
std::array<std::uint32_t, 256> pixel_table(const NumericFormat& format);

struct Batch {
    Tensor x;  // [b × features]
    Tensor y;  // [b × 10] one-hot
    std::vector<std::uint8_t> labels;
};

Batch make_batch(const Dataset& ds, std::span<const std::uint32_t> indices, const NumericFormat& format,
                 const std::array<std::uint32_t, 256>& pixels);

/// Shuffled mini-batches for one epoch; the last partial batch is kept.
class BatchStream {
public:
    BatchStream(const Dataset& ds, std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch,
                NumericFormat format);

    std::optional<Batch> next();
    std::size_t batch_count() const { return (order_.size() + batch_size_ - 1) / batch_size_; }
    const std::vector<std::uint32_t>& order() const { return order_; }

private:
    const Dataset* ds_;
    std::size_t batch_size_;
    NumericFormat format_;
    std::array<std::uint32_t, 256> pixels_;
    std::vector<std::uint32_t> order_;
    std::size_t cursor_ = 0;
};

}  // namespace posittrain
